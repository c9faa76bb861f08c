#pragma once

// The evolution problem
//   u_t - |u|^rho lap u + b0 |u|^{mu+1} = h(t, x),   u|_boundary = 0,
// with the companion absorption/amplification variant
//   u_t - |u|^rho lap u - b(x) |u|^{rho+1} = 0
// selected by supplying a spatial coefficient b(x).

#include "pnlab/pn_space.hpp"

#include <functional>
#include <optional>
#include <string>

namespace pnlab {

using SourceFn = std::function<double(double t, double x, double y)>;

struct ProblemSpec {
    double rho = 1.0;
    double mu = 0.0;
    double b0 = 0.0;
    std::optional<GridFunction> b_coeff;  // set: use -b(x)|u|^{rho+1} with mu = rho
    SourceFn source;                      // empty: h == 0
    GridFunction u0;
    double T = 1.0;

    ProblemSpec(const Grid& grid, double rho_, double mu_, double b0_, double T_)
        : rho(rho_), mu(mu_), b0(b0_), u0(grid), T(T_) {
        validate();
    }

    const Grid& grid() const { return u0.grid(); }

    void validate() const {
        if (!(rho > 0.0)) throw std::invalid_argument("ProblemSpec: rho must be > 0");
        if (!(mu >= 0.0)) throw std::invalid_argument("ProblemSpec: mu must be >= 0");
        if (!(T > 0.0)) throw std::invalid_argument("ProblemSpec: T must be > 0");
        if (b_coeff && b_coeff->grid() != u0.grid())
            throw std::invalid_argument("ProblemSpec: b(x) lives on a different grid");
    }

    GridFunction sample_source(double t) const {
        const Grid& g = grid();
        if (!source) return GridFunction(g);
        return GridFunction::sample(g, [&](double x, double y) { return source(t, x, y); });
    }

    bool has_source() const { return static_cast<bool>(source); }
};

/// Which branch of the solvability condition admitted (mu, rho).
struct Admissibility {
    bool admissible = false;
    int branch = 0;  // 1: min{0, rho/2-1} <= mu < rho <= 2;  2: rho/2-1 <= mu < rho
    std::string detail;
};

inline Admissibility admissibility(double rho, double mu) {
    Admissibility a;
    if (!(rho > 0.0)) {
        a.detail = "rho must be positive";
        return a;
    }
    const bool branch1 =
        rho <= 2.0 && std::min(0.0, rho / 2.0 - 1.0) <= mu && mu < rho;
    const bool branch2 = rho / 2.0 - 1.0 <= mu && mu < rho;
    if (branch1) {
        a.admissible = true;
        a.branch = 1;
        a.detail = "min{0, rho/2-1} <= mu < rho <= 2";
    } else if (branch2) {
        a.admissible = true;
        a.branch = 2;
        a.detail = "rho/2-1 <= mu < rho";
    } else {
        a.detail = "mu outside both admissible ranges";
    }
    return a;
}

inline Admissibility admissibility(const ProblemSpec& spec) {
    const double mu = spec.b_coeff ? spec.rho : spec.mu;
    return admissibility(spec.rho, mu);
}

/// Spatial operator: f(u) = -|u|^rho lap u + b0 |u|^{mu+1}, or the variant
/// -|u|^rho lap u - b(x) |u|^{rho+1} when a coefficient field is present.
inline GridFunction apply_spatial_operator(const GridFunction& u, const ProblemSpec& spec) {
    GridFunction lap = laplacian(u);
    GridFunction out(u.grid());
    if (spec.b_coeff) {
        const GridFunction& b = *spec.b_coeff;
        for (std::size_t i = 0; i < u.size(); ++i)
            out[i] = -abs_power(u[i], spec.rho) * lap[i] -
                     b[i] * abs_power(u[i], spec.rho + 1.0);
    } else {
        for (std::size_t i = 0; i < u.size(); ++i)
            out[i] = -abs_power(u[i], spec.rho) * lap[i] +
                     spec.b0 * abs_power(u[i], spec.mu + 1.0);
    }
    return out;
}

/// f(u) - h(t), nodewise.
inline GridFunction residual(const GridFunction& u, const ProblemSpec& spec, double t) {
    GridFunction r = apply_spatial_operator(u, spec);
    if (spec.has_source()) r -= spec.sample_source(t);
    return r;
}

}  // namespace pnlab
