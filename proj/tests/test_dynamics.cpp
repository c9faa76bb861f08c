#include "pnlab/driver.hpp"
#include "pnlab/dynamics.hpp"
#include "pnlab/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace pnlab;

TEST_CASE("energy functional values") {
    Grid g = Grid::line(1.0, 200);
    CHECK(phi(GridFunction(g)) == 0.0);

    EigenPair ep = first_eigenpair(g);
    CHECK(phi(ep.v1) == Catch::Approx(0.5).epsilon(1e-12));

    // the nodal sine sums are exact for this quadrature: phi = 1/4
    GridFunction s = GridFunction::sample(g, [](double x, double) { return std::sin(M_PI * x); });
    CHECK(phi(s) == Catch::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("decay bound: direct values, limits, monotonicity") {
    CHECK_THROWS_AS(GronwallParams(1.0, 0.9, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GronwallParams(-1.0, 2.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ghidaglia_bound(GronwallParams(1.0, 2.0, 0.0), 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(ghidaglia_bound(GronwallParams(1.0, 2.0, 0.0), -1.0),
                    std::invalid_argument);

    // theta=1, l=2, eta=0, t=2 -> 1/(1*1*2) = 0.5
    CHECK(ghidaglia_bound(GronwallParams(1.0, 2.0, 0.0), 2.0) ==
          Catch::Approx(0.5).epsilon(1e-14));
    // theta=2, l=3, eta=16, t=1 -> 8^{1/3} + 4^{-1/2} = 2.5
    CHECK(ghidaglia_bound(GronwallParams(2.0, 3.0, 16.0), 1.0) ==
          Catch::Approx(2.5).epsilon(1e-14));

    // eta = 0: the bound vanishes as t grows
    GronwallParams p(0.7, 1.8, 0.0);
    CHECK(ghidaglia_bound(p, 1e9) <= 1e-9);

    // non-increasing in t, decreasing in theta
    double prev = std::numeric_limits<double>::infinity();
    for (double t : {0.1, 0.5, 1.0, 5.0, 20.0}) {
        const double b = ghidaglia_bound(p, t);
        CHECK(b <= prev);
        prev = b;
    }
    for (double t : {0.3, 2.0}) {
        CHECK(ghidaglia_bound(GronwallParams(2.0, 1.8, 0.0), t) <
              ghidaglia_bound(GronwallParams(0.5, 1.8, 0.0), t));
    }
}

TEST_CASE("comparison ODE never exceeds the bound") {
    CHECK_THROWS_AS(verify_ghidaglia(GronwallParams(1, 2, 0), -1.0, 1.0),
                    std::invalid_argument);

    // eta=0, theta=1, l=2, huge initial value: y(t) = y0/(1 + y0 t) <= 1/t
    GronwallCheck c = verify_ghidaglia(GronwallParams(1.0, 2.0, 0.0), 1e6, 5.0);
    CHECK(c.violations == 0);
    for (std::size_t i = 0; i < c.times.size(); ++i) {
        const double t = c.times[i];
        const double exact = 1e6 / (1.0 + 1e6 * t);
        CHECK(c.values[i] == Catch::Approx(exact).epsilon(1e-5).margin(1e-12));
    }

    // eta > 0: the trajectory settles at (eta/theta)^{1/l}, below the bound
    GronwallCheck eq = verify_ghidaglia(GronwallParams(2.0, 3.0, 16.0), 5.0, 30.0);
    CHECK(eq.violations == 0);
    CHECK(eq.values.back() == Catch::Approx(2.0).epsilon(1e-6));
    CHECK(ghidaglia_bound(GronwallParams(2.0, 3.0, 16.0), 30.0) > eq.values.back());

    // randomized sweep
    Rng rng(77);
    for (int rep = 0; rep < 100; ++rep) {
        GronwallParams p(rng.uniform(0.1, 5.0), rng.uniform(1.1, 4.0),
                         rng.uniform(0.0, 10.0));
        const double y0 = std::pow(10.0, rng.uniform(-3.0, 6.0));
        GronwallCheck r = verify_ghidaglia(p, y0, 3.0);
        REQUIRE(r.violations == 0);
    }
}

TEST_CASE("decay study on a synthetic power-law trajectory") {
    Grid g = Grid::line(1.0, 8);
    ProblemSpec spec(g, 1.0, 0.5, 0.0, 10.0);
    TrajectoryRecord traj;
    for (int k = 0; k <= 2000; ++k) {
        const double t = 10.0 * k / 2000.0;
        traj.times.push_back(t);
        traj.states.emplace_back(g);
        StepDiagnostics d;
        d.t = t;
        d.phi = k == 0 ? 1.0 : std::pow(t, -2.0);  // exact tail slope -2
        traj.diagnostics.push_back(d);
    }
    DecayRecord rec = decay_study(traj, spec);
    REQUIRE(rec.status == DecayRecord::Status::ok);
    CHECK(rec.slope == Catch::Approx(-2.0).margin(0.1));
    CHECK(rec.slope_in_band);
    CHECK(!rec.envelope_violation);

    // subsampling by 2 moves the fitted slope by less than 0.05
    TrajectoryRecord half = subsample(traj, 2);
    DecayRecord rec2 = decay_study(half, spec);
    REQUIRE(rec2.status == DecayRecord::Status::ok);
    CHECK(std::abs(rec2.slope - rec.slope) <= 0.05);

    // a short record is inconclusive, not a failure
    TrajectoryRecord brief;
    for (int k = 0; k <= 10; ++k) {
        brief.times.push_back(k * 0.01);
        brief.states.emplace_back(g);
        StepDiagnostics d;
        d.t = k * 0.01;
        d.phi = 1.0;
        brief.diagnostics.push_back(d);
    }
    CHECK(decay_study(brief, spec).status == DecayRecord::Status::inconclusive);
}

TEST_CASE("regime classification from the amplification bound") {
    Grid g = Grid::line(1.0, 100);
    EigenPair ep = first_eigenpair(g);

    auto with_b = [&](double bval, bool eigen_start) {
        ProblemSpec spec(g, 1.0, 1.0, 0.0, 1.0);
        GridFunction b(g);
        for (auto& v : b.values()) v = bval;
        spec.b_coeff = std::move(b);
        if (eigen_start) spec.u0 = ep.v1;
        return spec;
    };

    // rho=1, b=4: M = 4*(9/4)/(4*2) = 4.5 < pi^2 -> bounded
    BlowupCriterion c = classify_regime(with_b(4.0, false), ep);
    CHECK(c.M == Catch::Approx(4.5).epsilon(1e-14));
    CHECK(c.regime == Regime::bounded);

    // b = 2 pi^2 > lambda1 with positive data -> candidate with delta = pi^2
    BlowupCriterion c2 = classify_regime(with_b(2.0 * M_PI * M_PI, true), ep);
    CHECK(c2.regime == Regime::blow_up_candidate);
    CHECK(c2.delta == Catch::Approx(M_PI * M_PI).epsilon(1e-12));

    // b = 0 -> bounded with M = 0
    BlowupCriterion c3 = classify_regime(with_b(0.0, false), ep);
    CHECK(c3.M == 0.0);
    CHECK(c3.regime == Regime::bounded);

    // scale consistency: b -> k b multiplies M by k
    BlowupCriterion a1 = classify_regime(with_b(3.0, false), ep);
    BlowupCriterion a2 = classify_regime(with_b(6.0, false), ep);
    CHECK(a2.M == Catch::Approx(2.0 * a1.M).epsilon(1e-14));

    // supercritical b without positive data is indeterminate
    BlowupCriterion c4 = classify_regime(with_b(2.0 * M_PI * M_PI, false), ep);
    CHECK(c4.regime == Regime::indeterminate);

    // the plain b0 problem is not classifiable
    ProblemSpec plain(g, 1.0, 0.5, 1.0, 1.0);
    CHECK_THROWS_AS(classify_regime(plain, ep), std::invalid_argument);
}

TEST_CASE("blow-up monitor: triggers on amplitude, quiet on zero runs") {
    Grid g = Grid::line(1.0, 50);
    EigenPair ep = first_eigenpair(g);

    ProblemSpec zero(g, 1.0, 1.0, 0.0, 1.0);
    BlowupMonitor quiet(zero, ep);
    for (int k = 0; k < 10; ++k) CHECK(!quiet.observe(0.1 * k, GridFunction(g)));

    ProblemSpec spec(g, 1.0, 1.0, 0.0, 1.0);
    spec.u0 = ep.v1;
    BlowupMonitor m(spec, ep, 1e3);
    GridFunction u = ep.v1;
    double t = 0.0;
    bool fired = false;
    for (int k = 0; k < 60 && !fired; ++k) {
        fired = m.observe(t, u);
        u *= 2.0;
        t += 0.01;
    }
    CHECK(fired);
    CHECK(m.trigger_time() >= 0.0);
    CHECK(m.ip_v1_monotone_increasing());

    // the positivity diagnostic stays finite on positive states (rho = 1
    // takes the logarithmic limit)
    bool any_finite = false;
    for (double v : m.diagnostic())
        if (std::isfinite(v)) any_finite = true;
    CHECK(any_finite);
}
