#include "pnlab/field_io.hpp"
#include "pnlab/grid.hpp"
#include "pnlab/rng.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

using namespace pnlab;

namespace {

GridFunction random_field(const Grid& g, Rng& rng, double lo = -1.0, double hi = 1.0) {
    GridFunction u(g);
    for (auto& v : u.values()) v = rng.uniform(lo, hi);
    return u;
}

double max_nodal_error(const GridFunction& a, const GridFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("grid invariants") {
    Grid g = Grid::line(2.0, 99);
    CHECK(g.dim() == 1);
    CHECK(g.spacing(0) * (g.n_cells(0) + 1) == Catch::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(Grid::line(1.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(Grid::line(-1.0, 10), std::invalid_argument);

    Grid r = Grid::rectangle(1.0, 3.0, 8, 12);
    CHECK(r.size() == 96);
    CHECK(r.spacing(1) * (r.n_cells(1) + 1) == Catch::Approx(3.0).epsilon(1e-15));

    CHECK_THROWS_AS(GridFunction(g, std::vector<double>(5, 0.0)), std::invalid_argument);
    std::vector<double> bad(g.size(), 0.0);
    bad[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(GridFunction(g, bad), std::invalid_argument);
}

TEST_CASE("laplacian of zero is zero and is linear") {
    Grid g = Grid::line(1.0, 64);
    GridFunction zero(g);
    CHECK(laplacian(zero).max_abs() == 0.0);

    Rng rng(7);
    GridFunction u = random_field(g, rng);
    GridFunction w = random_field(g, rng);
    GridFunction lhs = laplacian(2.5 * u - 0.75 * w);
    GridFunction rhs = 2.5 * laplacian(u) - 0.75 * laplacian(w);
    const double scale = rhs.max_abs();
    CHECK(max_nodal_error(lhs, rhs) <= 1e-12 * scale);

    GridFunction gl = gradient(2.5 * u - 0.75 * w)[0];
    GridFunction gr = 2.5 * gradient(u)[0] - 0.75 * gradient(w)[0];
    CHECK(max_nodal_error(gl, gr) <= 1e-12 * gr.max_abs());
}

TEST_CASE("laplacian converges at second order on sine fields") {
    auto f = [](double x, double) { return std::sin(M_PI * x); };
    std::vector<double> errs, hs;
    for (int n : {100, 200, 400}) {
        Grid g = Grid::line(1.0, n);
        GridFunction u = GridFunction::sample(g, f);
        GridFunction exact = GridFunction::sample(
            g, [](double x, double) { return -M_PI * M_PI * std::sin(M_PI * x); });
        errs.push_back(max_nodal_error(laplacian(u), exact));
        hs.push_back(g.spacing(0));
    }
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
        const double order = oracle::observed_order(errs[i], errs[i + 1], hs[i], hs[i + 1]);
        CHECK(order >= 1.8);
        CHECK(order <= 2.2);
    }
}

TEST_CASE("laplacian of a 2D sine product matches -2 pi^2 u") {
    std::vector<double> errs, hs;
    for (int n : {24, 48}) {
        Grid g = Grid::rectangle(1.0, 1.0, n, n);
        GridFunction u = GridFunction::sample(g, [](double x, double y) {
            return std::sin(M_PI * x) * std::sin(M_PI * y);
        });
        GridFunction expected = -2.0 * M_PI * M_PI * u;
        errs.push_back(max_nodal_error(laplacian(u), expected));
        hs.push_back(g.spacing(0));
    }
    const double order = oracle::observed_order(errs[0], errs[1], hs[0], hs[1]);
    CHECK(order >= 1.8);
    CHECK(order <= 2.2);
}

TEST_CASE("gradient matches analytic derivatives") {
    GridFunction z(Grid::line(1.0, 32));
    CHECK(gradient(z)[0].max_abs() == 0.0);

    std::vector<double> errs, hs;
    for (int n : {100, 200, 400}) {
        Grid g = Grid::line(1.0, n);
        GridFunction u = GridFunction::sample(
            g, [](double x, double) { return std::sin(M_PI * x); });
        GridFunction exact = GridFunction::sample(
            g, [](double x, double) { return M_PI * std::cos(M_PI * x); });
        errs.push_back(max_nodal_error(gradient(u)[0], exact));
        hs.push_back(g.spacing(0));
    }
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
        const double order = oracle::observed_order(errs[i], errs[i + 1], hs[i], hs[i + 1]);
        CHECK(order >= 1.8);
        CHECK(order <= 2.2);
    }

    // 2D: componentwise analytic match
    Grid g2 = Grid::rectangle(1.0, 1.0, 48, 48);
    GridFunction u2 = GridFunction::sample(g2, [](double x, double y) {
        return std::sin(M_PI * x) * std::sin(M_PI * y);
    });
    auto grads = gradient(u2);
    GridFunction gx = GridFunction::sample(g2, [](double x, double y) {
        return M_PI * std::cos(M_PI * x) * std::sin(M_PI * y);
    });
    GridFunction gy = GridFunction::sample(g2, [](double x, double y) {
        return M_PI * std::sin(M_PI * x) * std::cos(M_PI * y);
    });
    CHECK(max_nodal_error(grads[0], gx) <= 8e-3);
    CHECK(max_nodal_error(grads[1], gy) <= 8e-3);
}

TEST_CASE("quadrature hits the closed-form integrals") {
    CHECK(integrate(GridFunction(Grid::line(1.0, 10))) == 0.0);

    Grid g = Grid::line(1.0, 200);
    GridFunction u = GridFunction::sample(g, [](double x, double) { return std::sin(M_PI * x); });
    CHECK(integrate(u) == Catch::Approx(2.0 / M_PI).margin(1e-4));

    Grid g2 = Grid::rectangle(1.0, 1.0, 100, 100);
    GridFunction u2 = GridFunction::sample(g2, [](double x, double y) {
        return std::sin(M_PI * x) * std::sin(M_PI * y);
    });
    CHECK(integrate(u2) == Catch::Approx(4.0 / (M_PI * M_PI)).margin(1e-3));

    // nonnegative nodal values integrate to a nonnegative number
    Rng rng(11);
    GridFunction nn = random_field(g, rng, 0.0, 3.0);
    CHECK(integrate(nn) >= 0.0);
}

TEST_CASE("discrete operators are symmetric in the quadrature product") {
    Grid g = Grid::line(1.0, 80);
    Rng rng(3);
    for (int rep = 0; rep < 5; ++rep) {
        GridFunction u = random_field(g, rng);
        GridFunction w = random_field(g, rng);
        const double a = inner(laplacian(u), w);
        const double b = inner(u, laplacian(w));
        CHECK(std::abs(a - b) <= 1e-10 * std::max(std::abs(a), 1.0));
    }
    Grid g2 = Grid::rectangle(1.0, 2.0, 12, 20);
    for (int rep = 0; rep < 3; ++rep) {
        GridFunction u = random_field(g2, rng);
        GridFunction w = random_field(g2, rng);
        const double a = inner(laplacian(u), w);
        const double b = inner(u, laplacian(w));
        CHECK(std::abs(a - b) <= 1e-10 * std::max(std::abs(a), 1.0));
    }
}

TEST_CASE("first eigenpair: discrete and continuum values") {
    Grid g = Grid::line(1.0, 200);
    EigenPair ep = first_eigenpair(g);
    CHECK(ep.lambda_continuum == Catch::Approx(M_PI * M_PI).epsilon(1e-12));
    CHECK(std::abs(ep.lambda_discrete - ep.lambda_continuum) / ep.lambda_continuum <= 1e-3);

    // residual certificate
    GridFunction Av = -1.0 * laplacian(ep.v1);
    GridFunction defect = Av - ep.lambda_discrete * ep.v1;
    CHECK(l2_norm(defect) / ep.lambda_discrete <= 1e-10);

    // strictly positive, unit quadrature norm
    for (double v : ep.v1.values()) CHECK(v > 0.0);
    CHECK(l2_norm(ep.v1) == Catch::Approx(1.0).epsilon(1e-12));

    // matches the normalized sine profile
    GridFunction s = GridFunction::sample(g, [](double x, double) { return std::sin(M_PI * x); });
    s *= 1.0 / l2_norm(s);
    CHECK(l2_norm(ep.v1 - s) <= 1e-3);

    EigenPair ep2 = first_eigenpair(Grid::rectangle(1.0, 1.0, 40, 40));
    CHECK(ep2.lambda_continuum == Catch::Approx(2.0 * M_PI * M_PI).epsilon(1e-12));
    CHECK(std::abs(ep2.lambda_discrete - ep2.lambda_continuum) / ep2.lambda_continuum <= 2e-3);
}

TEST_CASE("discrete Poincare bound holds on random fields") {
    Grid g = Grid::line(1.0, 60);
    EigenPair ep = first_eigenpair(g);
    Rng rng(1234);
    for (int rep = 0; rep < 20; ++rep) {
        GridFunction u = random_field(g, rng);
        GridFunction gm = gradient_magnitude(u);
        const double lhs = inner(u, u);
        const double rhs = inner(gm, gm) / ep.lambda_discrete;
        CHECK(lhs <= rhs * (1.0 + 1e-12));
    }
}

TEST_CASE("binary field dump round-trips exactly") {
    Rng rng(99);
    for (const Grid& g : {Grid::line(2.0, 37), Grid::rectangle(1.0, 0.5, 9, 14)}) {
        GridFunction u = random_field(g, rng, -10.0, 10.0);
        std::stringstream buf;
        write_binary(u, buf);
        GridFunction v = read_binary(buf);
        REQUIRE(v.grid() == g);
        for (std::size_t i = 0; i < u.size(); ++i) REQUIRE(v[i] == u[i]);
    }
}

TEST_CASE("csv field dump carries index, coordinates, value") {
    Grid g = Grid::line(1.0, 3);
    GridFunction u(g, {0.5, -1.0, 2.0});
    std::stringstream buf;
    write_csv(u, buf);
    std::string line;
    std::getline(buf, line);
    CHECK(line == "index,x,value");
    std::getline(buf, line);
    CHECK(line == "0,0.25,0.5");
}
