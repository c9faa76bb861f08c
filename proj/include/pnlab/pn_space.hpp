#pragma once

// Computable realizations of the weighted-gradient/weighted-Laplacian
// function classes: the sign-preserving power transform eta(u) = |u|^rho u,
// the induced seminorms and metrics, and their time-integrated (Bochner)
// lifts over trajectories.
//
// Power conventions: |u|^s at u = 0 is 0 for s > 0 and 1 for s = 0.
// Negative exponents only appear inside sign-carrying products, where the
// factor u forces the limit 0 at u = 0.

#include "pnlab/grid.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace pnlab {

/// |x|^s with 0^0 = 1 and 0^s = 0 for s > 0.
inline double abs_power(double x, double s) {
    if (x == 0.0) return s == 0.0 ? 1.0 : 0.0;
    return std::pow(std::abs(x), s);
}

/// sign(x) |x|^s, with the convention 0 at x = 0 for every s.
inline double signed_power(double x, double s) {
    if (x == 0.0) return 0.0;
    const double p = std::pow(std::abs(x), s);
    return x > 0.0 ? p : -p;
}

/// Exponent pair identifying a weighted space; rho = alpha/beta.
struct PnParams {
    double alpha;
    double beta;

    PnParams(double a, double b) : alpha(a), beta(b) {
        if (beta < 1.0) throw std::invalid_argument("PnParams: beta must be >= 1");
        if (alpha / beta <= -1.0)
            throw std::invalid_argument("PnParams: alpha/beta must be > -1");
    }

    double rho() const { return alpha / beta; }
    double degree() const { return alpha + beta; }
};

/// Time exponent plus the spatial exponent pair for Bochner seminorms.
struct BochnerParams {
    double p;
    PnParams spatial;

    BochnerParams(double p_, PnParams s) : p(p_), spatial(s) {
        if (p < 1.0) throw std::invalid_argument("BochnerParams: p must be >= 1");
    }
};

/// Nodewise v = |u|^rho u. Sign-preserving and monotone per node.
inline GridFunction eta_transform(const GridFunction& u, const PnParams& p) {
    GridFunction v(u.grid());
    const double s = p.rho() + 1.0;
    for (std::size_t i = 0; i < u.size(); ++i) v[i] = signed_power(u[i], s);
    return v;
}

/// Nodewise u = |v|^{-alpha/(alpha+beta)} v, the inverse of eta_transform.
inline GridFunction eta_inverse(const GridFunction& v, const PnParams& p) {
    GridFunction u(v.grid());
    const double s = 1.0 / (p.rho() + 1.0);
    for (std::size_t i = 0; i < v.size(); ++i) u[i] = signed_power(v[i], s);
    return u;
}

/// ( integral |u|^{a+b} + |u|^a |grad u|^b )^{1/(a+b)}.
inline double s1_seminorm(const GridFunction& u, const PnParams& p) {
    GridFunction gm = gradient_magnitude(u);
    const double total = integrate_nodes(u, [&](std::size_t i) {
        return abs_power(u[i], p.degree()) + abs_power(u[i], p.alpha) * abs_power(gm[i], p.beta);
    });
    return std::pow(total, 1.0 / p.degree());
}

/// Reduced variant: ( integral |u|^rho |lap u|^2 )^{1/(rho+2)}.
inline double s_delta_core_seminorm(const GridFunction& u, double rho) {
    GridFunction lap = laplacian(u);
    const double total = integrate_nodes(
        u, [&](std::size_t i) { return abs_power(u[i], rho) * lap[i] * lap[i]; });
    return std::pow(total, 1.0 / (rho + 2.0));
}

/// Full second-order seminorm: the first-order part is taken with the
/// companion pair (alpha1, beta1), which must satisfy a1 + b1 = a + b.
inline double s_delta_seminorm(const GridFunction& u, const PnParams& p,
                               const PnParams& p1) {
    if (std::abs(p1.degree() - p.degree()) > 1e-12 * std::max(1.0, p.degree()))
        throw std::invalid_argument(
            "s_delta_seminorm: companion exponents must satisfy alpha1+beta1 = alpha+beta");
    GridFunction lap = laplacian(u);
    const double second = integrate_nodes(
        u, [&](std::size_t i) { return abs_power(u[i], p.alpha) * abs_power(lap[i], p.beta); });
    const double first = std::pow(s1_seminorm(u, p1), p1.degree());
    return std::pow(first + second, 1.0 / p.degree());
}

/// Default companion choice alpha1 = alpha, beta1 = beta.
inline double s_delta_seminorm(const GridFunction& u, const PnParams& p) {
    return s_delta_seminorm(u, p, p);
}

// ---------------------------------------------------------------------------
// Sobolev-style helper norms used by the metrics.

inline double lbeta_norm(const GridFunction& v, double beta) {
    return std::pow(integrate_nodes(v, [&](std::size_t i) { return abs_power(v[i], beta); }),
                    1.0 / beta);
}

/// ( integral |v|^beta + |grad v|^beta )^{1/beta}.
inline double w1beta_norm(const GridFunction& v, double beta) {
    GridFunction gm = gradient_magnitude(v);
    const double total = integrate_nodes(v, [&](std::size_t i) {
        return abs_power(v[i], beta) + abs_power(gm[i], beta);
    });
    return std::pow(total, 1.0 / beta);
}

enum class MetricVariant {
    sobolev,        // distance through eta in the full first-order norm
    gradient_only,  // distance of the weighted gradients alone
};

/// Metric of the first-order space: either
///   || eta(u) - eta(w) ||_{W^1_beta}^{1/(rho+1)}        (sobolev), or
///   || |u|^rho grad u - |w|^rho grad w ||_{L_beta}^{1/(rho+1)}  (gradient_only).
inline double metric_s1(const GridFunction& u, const GridFunction& w, const PnParams& p,
                        MetricVariant variant = MetricVariant::sobolev) {
    detail::require_same_grid(u, w);
    const double expo = 1.0 / (p.rho() + 1.0);
    if (variant == MetricVariant::sobolev) {
        GridFunction d = eta_transform(u, p) - eta_transform(w, p);
        return std::pow(w1beta_norm(d, p.beta), expo);
    }
    auto gu = gradient(u);
    auto gw = gradient(w);
    const double rho = p.rho();
    GridFunction mag(u.grid());
    for (std::size_t i = 0; i < u.size(); ++i) {
        double s = 0.0;
        for (std::size_t a = 0; a < gu.size(); ++a) {
            const double d = abs_power(u[i], rho) * gu[a][i] - abs_power(w[i], rho) * gw[a][i];
            s += d * d;
        }
        mag[i] = std::sqrt(s);
    }
    return std::pow(lbeta_norm(mag, p.beta), expo);
}

/// Metric of the second-order space. The gradient_only variant keeps just the
/// weighted-Laplacian distance; sobolev adds the eta1 first-order term with
/// companion exponents (alpha1, beta1).
inline double metric_s_delta(const GridFunction& u, const GridFunction& w, const PnParams& p,
                             const PnParams& p1,
                             MetricVariant variant = MetricVariant::sobolev) {
    detail::require_same_grid(u, w);
    GridFunction lu = laplacian(u);
    GridFunction lw = laplacian(w);
    const double rho = p.rho();
    GridFunction d(u.grid());
    for (std::size_t i = 0; i < u.size(); ++i)
        d[i] = abs_power(u[i], rho) * lu[i] - abs_power(w[i], rho) * lw[i];
    double value = std::pow(lbeta_norm(d, p.beta), 1.0 / (rho + 1.0));
    if (variant == MetricVariant::sobolev) {
        GridFunction d1 = eta_transform(u, p1) - eta_transform(w, p1);
        value += std::pow(w1beta_norm(d1, p1.beta), 1.0 / (p1.rho() + 1.0));
    }
    return value;
}

// ---------------------------------------------------------------------------
// Bochner lifts: trapezoid rule in time over per-slice spatial seminorms.

enum class SpatialSeminorm { s1, s_delta, s_delta_core };

inline double bochner_seminorm(const std::vector<double>& times,
                               const std::vector<GridFunction>& states,
                               const BochnerParams& bp,
                               SpatialSeminorm which = SpatialSeminorm::s_delta_core,
                               std::optional<PnParams> companion = std::nullopt) {
    if (times.size() != states.size())
        throw std::invalid_argument("bochner_seminorm: times/states size mismatch");
    if (times.size() < 2)
        throw std::invalid_argument("bochner_seminorm: need at least 2 time samples");
    std::vector<double> slice(times.size());
    for (std::size_t k = 0; k < states.size(); ++k) {
        switch (which) {
            case SpatialSeminorm::s1:
                slice[k] = s1_seminorm(states[k], bp.spatial);
                break;
            case SpatialSeminorm::s_delta:
                slice[k] = companion ? s_delta_seminorm(states[k], bp.spatial, *companion)
                                     : s_delta_seminorm(states[k], bp.spatial);
                break;
            case SpatialSeminorm::s_delta_core:
                slice[k] = s_delta_core_seminorm(states[k], bp.spatial.rho());
                break;
        }
    }
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double dt = times[k + 1] - times[k];
        total += 0.5 * dt * (std::pow(slice[k], bp.p) + std::pow(slice[k + 1], bp.p));
    }
    return std::pow(total, 1.0 / bp.p);
}

}  // namespace pnlab
