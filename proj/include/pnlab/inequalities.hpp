#pragma once

// Numerical exercise of the weighted embedding inequalities and the two
// differential identities behind them, over corpora of smooth test
// functions. Empirical constants are fitted (max-ratio for one constant, a
// tiny LP for two) and checked for stability under grid refinement.
//
// Integrands with negative powers of |u| are evaluated on the masked region
// |u| > 1e-8 * max|u|; the masked measure fraction is reported.

#include "pnlab/corpus.hpp"
#include "pnlab/field_io.hpp"
#include "pnlab/pn_space.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace pnlab {

inline constexpr double kMaskRelativeThreshold = 1e-8;

struct MaskedIntegral {
    double value = 0.0;
    double masked_fraction = 0.0;
};

/// Quadrature of node_value(i) over the unmasked region. The mask drops
/// nodes with |u_i| <= 1e-8 * max|u| and is applied only when needs_mask.
template <class F>
MaskedIntegral masked_integral(const GridFunction& u, bool needs_mask, F&& node_value) {
    if (!needs_mask) {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += node_value(i);
        return {s * u.grid().cell_volume(), 0.0};
    }
    const double cut = kMaskRelativeThreshold * u.max_abs();
    double s = 0.0;
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (std::abs(u[i]) > cut)
            s += node_value(i);
        else
            ++dropped;
    }
    return {s * u.grid().cell_volume(),
            static_cast<double>(dropped) / static_cast<double>(u.size())};
}

// ---------------------------------------------------------------------------
// Differential identities, evaluated with the discrete operators so that the
// residual is a genuine consistency check rather than an algebraic identity.

struct IdentityResidual {
    double residual = 0.0;         // masked L2 norm of the defect
    double masked_fraction = 0.0;
};

/// Defect of the chain rule for the power transform:
///   lap eta(u) = ((a+b)/b) |u|^{a/b} lap u
///              + (a(a+b)/b^2) |u|^{a/b - 2} u |grad u|^2.
/// The last factor is singular at zeros of u once a/b <= 1, so evaluation is
/// masked there (for a = 0 its coefficient vanishes and nothing is masked).
inline IdentityResidual chain_rule_residual(const GridFunction& u, const PnParams& p) {
    const double rho = p.rho();
    const double c1 = (p.alpha + p.beta) / p.beta;
    const double c2 = p.alpha * (p.alpha + p.beta) / (p.beta * p.beta);
    const bool needs_mask = p.alpha > 0.0 && rho <= 1.0;

    GridFunction lhs = laplacian(eta_transform(u, p));
    GridFunction lap = laplacian(u);
    GridFunction gm = gradient_magnitude(u);

    const double cut = kMaskRelativeThreshold * u.max_abs();
    double sum = 0.0;
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (needs_mask && std::abs(u[i]) <= cut) {
            ++dropped;
            continue;
        }
        const double rhs = c1 * abs_power(u[i], rho) * lap[i] +
                           c2 * signed_power(u[i], rho - 1.0) * gm[i] * gm[i];
        const double r = lhs[i] - rhs;
        sum += r * r;
    }
    return {std::sqrt(sum * u.grid().cell_volume()),
            static_cast<double>(dropped) / static_cast<double>(u.size())};
}

/// Defect of the splitting of |u|^{rho-2} u |grad u|^2 into two weighted
/// Laplacian terms with splitting parameter theta in [1/2, 1):
///   |u|^{rho-2} u |grad u|^2
///     = (1/(rho(rho+1)(1-theta)))   lap(|u|^rho u)
///     - (1/(rho(theta rho+1)(1-theta))) |u|^{(1-theta)rho} lap(|u|^{theta rho} u).
/// Always masked: the left side carries |u|^{rho-2}.
inline IdentityResidual power_split_residual(const GridFunction& u, double rho,
                                             double theta) {
    if (!(rho > 0.0)) throw std::invalid_argument("power_split_residual: rho must be > 0");
    if (!(theta >= 0.5 && theta < 1.0))
        throw std::invalid_argument("power_split_residual: theta must lie in [1/2, 1)");
    const double a = 1.0 / (rho * (rho + 1.0) * (1.0 - theta));
    const double b = 1.0 / (rho * (theta * rho + 1.0) * (1.0 - theta));

    GridFunction gm = gradient_magnitude(u);
    GridFunction eta_full(u.grid());
    GridFunction eta_theta(u.grid());
    for (std::size_t i = 0; i < u.size(); ++i) {
        eta_full[i] = signed_power(u[i], rho + 1.0);
        eta_theta[i] = signed_power(u[i], theta * rho + 1.0);
    }
    GridFunction lap_full = laplacian(eta_full);
    GridFunction lap_theta = laplacian(eta_theta);

    const double cut = kMaskRelativeThreshold * u.max_abs();
    double sum = 0.0;
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (std::abs(u[i]) <= cut) {
            ++dropped;
            continue;
        }
        const double lhs = signed_power(u[i], rho - 1.0) * gm[i] * gm[i];
        const double rhs =
            a * lap_full[i] - b * abs_power(u[i], (1.0 - theta) * rho) * lap_theta[i];
        const double r = lhs - rhs;
        sum += r * r;
    }
    return {std::sqrt(sum * u.grid().cell_volume()),
            static_cast<double>(dropped) / static_cast<double>(u.size())};
}

/// The theta = 2/3 special case in flux-divergence form:
///   |u|^{rho-2} u |grad u|^2 = (3/(rho(rho+1))) lap(|u|^rho u)
///                             - (3/rho) |u|^{rho/3} div(|u|^{2 rho/3} grad u).
inline IdentityResidual power_split_flux_residual(const GridFunction& u, double rho) {
    if (!(rho > 0.0))
        throw std::invalid_argument("power_split_flux_residual: rho must be > 0");
    const double a = 3.0 / (rho * (rho + 1.0));
    const double b = 3.0 / rho;

    GridFunction gm = gradient_magnitude(u);
    GridFunction eta_full(u.grid());
    for (std::size_t i = 0; i < u.size(); ++i) eta_full[i] = signed_power(u[i], rho + 1.0);
    GridFunction lap_full = laplacian(eta_full);

    auto grad_u = gradient(u);
    std::vector<GridFunction> flux;
    flux.reserve(grad_u.size());
    for (const auto& comp : grad_u) {
        GridFunction fcomp(u.grid());
        for (std::size_t i = 0; i < u.size(); ++i)
            fcomp[i] = abs_power(u[i], 2.0 * rho / 3.0) * comp[i];
        flux.push_back(std::move(fcomp));
    }
    GridFunction div_flux = divergence(flux);

    const double cut = kMaskRelativeThreshold * u.max_abs();
    double sum = 0.0;
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (std::abs(u[i]) <= cut) {
            ++dropped;
            continue;
        }
        const double lhs = signed_power(u[i], rho - 1.0) * gm[i] * gm[i];
        const double rhs = a * lap_full[i] - b * abs_power(u[i], rho / 3.0) * div_flux[i];
        const double r = lhs - rhs;
        sum += r * r;
    }
    return {std::sqrt(sum * u.grid().cell_volume()),
            static_cast<double>(dropped) / static_cast<double>(u.size())};
}

struct RefinementStudy {
    std::string id;
    std::vector<double> spacing;    // h at each level
    std::vector<double> residual;   // masked L2 residual at each level
    double observed_order = 0.0;    // least-squares slope of log r vs log h
    double max_masked_fraction = 0.0;
};

/// Run an identity residual over successively refined samplings of a
/// closed-form entry and estimate the convergence order.
template <class ResFn>
RefinementStudy refinement_study(const CorpusEntry& entry, const Grid& base,
                                 const std::vector<int>& factors, ResFn&& residual_of) {
    RefinementStudy study;
    study.id = entry.id;
    for (int f : factors) {
        Grid g = base.refined(f);
        GridFunction u = sample(entry, g);
        IdentityResidual r = residual_of(u);
        study.spacing.push_back(g.spacing(0));
        study.residual.push_back(r.residual);
        study.max_masked_fraction = std::max(study.max_masked_fraction, r.masked_fraction);
    }
    // least-squares slope of log residual against log h
    const std::size_t m = study.spacing.size();
    if (m >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t used = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (study.residual[i] <= 0.0) continue;
            const double x = std::log(study.spacing[i]);
            const double y = std::log(study.residual[i]);
            sx += x; sy += y; sxx += x * x; sxy += x * y;
            ++used;
        }
        if (used >= 2)
            study.observed_order = (used * sxy - sx * sy) / (used * sxx - sx * sx);
    }
    return study;
}

// ---------------------------------------------------------------------------
// Inequality corpus sweeps with fitted constants.

struct InequalityRow {
    std::string function_id;
    double lhs = 0.0;
    double rhs = 0.0;    // bound with fitted constants: c1*termA + c2*termB
    double ratio = 0.0;  // lhs / rhs
    double term_a = 0.0;
    double term_b = 0.0;
    bool skipped = false;
    std::string note;
};

struct FittedConstants {
    double c1 = 0.0;
    double c2 = 0.0;
    bool two_term = false;
    double scale() const { return c1 + c2; }
};

struct RefinementLevel {
    int factor = 1;
    FittedConstants constants;
};

struct InequalityReport {
    std::string id;
    std::string description;
    std::vector<InequalityRow> rows;            // base resolution, post-fit
    FittedConstants fitted;                     // base resolution
    std::vector<RefinementLevel> refinement;
    double max_drift = 0.0;                     // of c1+c2 between levels
    bool refinement_stable = true;              // max_drift < 25%
    bool violation = false;
    std::string violation_note;
    double max_masked_fraction = 0.0;
};

/// One inequality: lhs(u) <= c1 * term_a(u) [+ c2 * term_b(u)].
struct InequalityDefinition {
    std::string id;
    std::string description;
    std::function<MaskedIntegral(const GridFunction&)> lhs;
    std::function<MaskedIntegral(const GridFunction&)> term_a;
    std::function<MaskedIntegral(const GridFunction&)> term_b;  // empty: one constant
};

namespace detail {

inline double fit_single_constant(const std::vector<InequalityRow>& rows) {
    double c = 0.0;
    for (const auto& r : rows)
        if (!r.skipped && r.term_a > 0.0) c = std::max(c, r.lhs / r.term_a);
    return c;
}

/// Minimize c1 + c2 subject to c1*A_i + c2*B_i >= L_i, c1, c2 >= 0.
/// Vertex enumeration over the active-constraint candidates.
inline FittedConstants fit_two_constants(const std::vector<InequalityRow>& rows) {
    std::vector<std::array<double, 3>> cons;  // (A, B, L)
    for (const auto& r : rows)
        if (!r.skipped && r.lhs > 0.0) cons.push_back({r.term_a, r.term_b, r.lhs});
    FittedConstants best{0.0, 0.0, true};
    if (cons.empty()) return best;

    auto feasible = [&](double c1, double c2) {
        if (!(c1 >= 0.0) || !(c2 >= 0.0)) return false;
        for (const auto& c : cons)
            if (c1 * c[0] + c2 * c[1] < c[2] * (1.0 - 1e-12)) return false;
        return true;
    };

    double best_obj = std::numeric_limits<double>::infinity();
    auto consider = [&](double c1, double c2) {
        if (!std::isfinite(c1) || !std::isfinite(c2)) return;
        if (!feasible(c1, c2)) return;
        if (c1 + c2 < best_obj) {
            best_obj = c1 + c2;
            best.c1 = c1;
            best.c2 = c2;
        }
    };

    // axis candidates
    double ca = 0.0, cb = 0.0;
    bool a_ok = true, b_ok = true;
    for (const auto& c : cons) {
        if (c[0] > 0.0) ca = std::max(ca, c[2] / c[0]); else a_ok = false;
        if (c[1] > 0.0) cb = std::max(cb, c[2] / c[1]); else b_ok = false;
    }
    if (a_ok) consider(ca, 0.0);
    if (b_ok) consider(0.0, cb);

    // pairwise intersections of binding constraints
    for (std::size_t i = 0; i < cons.size(); ++i)
        for (std::size_t j = i + 1; j < cons.size(); ++j) {
            const double det = cons[i][0] * cons[j][1] - cons[j][0] * cons[i][1];
            if (std::abs(det) < 1e-300) continue;
            const double c1 = (cons[i][2] * cons[j][1] - cons[j][2] * cons[i][1]) / det;
            const double c2 = (cons[i][0] * cons[j][2] - cons[j][0] * cons[i][2]) / det;
            consider(c1, c2);
        }
    return best;
}

}  // namespace detail

/// Sweep one inequality over the corpus at the base grid and refined grids,
/// fit the constants per level, and flag violations. When `pinned` is given
/// the bound is checked against those constants instead of the fitted ones
/// (regression mode).
inline InequalityReport run_inequality(const InequalityDefinition& def,
                                       const TestCorpus& corpus,
                                       const std::vector<int>& refinement_factors = {1, 2},
                                       std::optional<FittedConstants> pinned = std::nullopt,
                                       double tol = 1e-9) {
    InequalityReport report;
    report.id = def.id;
    report.description = def.description;
    const bool two_term = static_cast<bool>(def.term_b);

    for (std::size_t level = 0; level < refinement_factors.size(); ++level) {
        const Grid g = corpus.grid.refined(refinement_factors[level]);
        std::vector<InequalityRow> rows;
        rows.reserve(corpus.entries.size());
        for (const auto& entry : corpus.entries) {
            GridFunction u = sample(entry, g);
            InequalityRow row;
            row.function_id = entry.id;
            MaskedIntegral l = def.lhs(u);
            MaskedIntegral a = def.term_a(u);
            MaskedIntegral b = two_term ? def.term_b(u) : MaskedIntegral{};
            row.lhs = l.value;
            row.term_a = a.value;
            row.term_b = b.value;
            report.max_masked_fraction =
                std::max({report.max_masked_fraction, l.masked_fraction, a.masked_fraction,
                          b.masked_fraction});
            if (!std::isfinite(row.lhs) || !std::isfinite(row.term_a) ||
                !std::isfinite(row.term_b)) {
                report.violation = true;
                report.violation_note = "non-finite integral for " + entry.id;
                row.skipped = true;
                row.note = "non-finite";
            } else if (row.lhs <= 0.0 && row.term_a <= 0.0 && row.term_b <= 0.0) {
                row.skipped = true;
                row.note = "zero function";
            } else if (row.term_a <= 0.0 && (!two_term || row.term_b <= 0.0) &&
                       row.lhs > tol) {
                report.violation = true;
                report.violation_note = "vanishing bound with nonzero left side for " + entry.id;
                row.skipped = true;
                row.note = "zero denominator";
            }
            rows.push_back(std::move(row));
        }

        FittedConstants fit;
        if (two_term)
            fit = detail::fit_two_constants(rows);
        else
            fit = FittedConstants{detail::fit_single_constant(rows), 0.0, false};

        const FittedConstants& bound = pinned ? *pinned : fit;
        for (auto& row : rows) {
            if (row.skipped) continue;
            row.rhs = bound.c1 * row.term_a + bound.c2 * row.term_b;
            row.ratio = row.rhs > 0.0 ? row.lhs / row.rhs
                                      : (row.lhs > 0.0 ? std::numeric_limits<double>::infinity()
                                                       : 0.0);
            if (row.lhs > row.rhs * (1.0 + tol) + tol) {
                report.violation = true;
                if (report.violation_note.empty())
                    report.violation_note = "bound exceeded for " + row.function_id;
            }
        }

        report.refinement.push_back({refinement_factors[level], fit});
        if (level == 0) {
            report.rows = std::move(rows);
            report.fitted = fit;
        }
    }

    for (std::size_t l = 0; l + 1 < report.refinement.size(); ++l) {
        const double a = report.refinement[l].constants.scale();
        const double b = report.refinement[l + 1].constants.scale();
        if (a > 0.0)
            report.max_drift = std::max(report.max_drift, std::abs(b - a) / a);
        else if (b > 0.0)
            report.max_drift = std::numeric_limits<double>::infinity();
    }
    report.refinement_stable = std::isfinite(report.max_drift) && report.max_drift < 0.25;
    return report;
}

// ---------------------------------------------------------------------------
// Named inequality verifiers. Each validates its exponent domain and then
// delegates to run_inequality.

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

/// integral |u|^p0 * |field|^p1 with masking when p0 < 0.
inline auto weighted_field_integral(double p0, double p1,
                                    GridFunction (*field_of)(const GridFunction&)) {
    return [p0, p1, field_of](const GridFunction& u) {
        GridFunction f = field_of(u);
        return masked_integral(u, p0 < 0.0, [&](std::size_t i) {
            return abs_power(u[i], p0) * abs_power(f[i], p1);
        });
    };
}

inline auto plain_power_integral(double p0) {
    return [p0](const GridFunction& u) {
        return masked_integral(u, p0 < 0.0,
                               [&](std::size_t i) { return abs_power(u[i], p0); });
    };
}

inline GridFunction grad_mag_field(const GridFunction& u) { return gradient_magnitude(u); }
inline GridFunction laplacian_field(const GridFunction& u) { return laplacian(u); }

inline double dimension_gradient_exponent_floor(int dim) {
    // beta > n/(n-1) in dimension n >= 2; every beta > 1 is admitted in 1D.
    return dim >= 2 ? static_cast<double>(dim) / (dim - 1) : 1.0;
}

}  // namespace detail

/// integral |u|^a |grad u|^{b0+b}
///   <= c1 * sum_i integral |u|^{a+b0} |Dii u|^b  (+ c2 * integral |u|^{a+b0+b}).
/// The zero-order term enters only when b > b0.
inline InequalityReport verify_gradient_by_second_derivatives(
    const TestCorpus& corpus, double alpha, double beta, double beta0,
    const std::vector<int>& factors = {1, 2},
    std::optional<FittedConstants> pinned = std::nullopt) {
    detail::require(alpha > -1.0, "gradient-by-second-derivatives: need alpha > -1");
    detail::require(beta >= beta0 && beta0 >= 0.0,
                    "gradient-by-second-derivatives: need beta >= beta0 >= 0");
    detail::require(beta >= 1.0, "gradient-by-second-derivatives: need beta >= 1");
    detail::require(beta0 + beta >= 2.0,
                    "gradient-by-second-derivatives: need beta0 + beta >= 2");
    InequalityDefinition def;
    def.id = "grad-second";
    def.description =
        "weighted gradient power bounded by axis second derivatives (+ zero-order term)";
    def.lhs = detail::weighted_field_integral(alpha, beta0 + beta, detail::grad_mag_field);
    def.term_a = [alpha, beta, beta0](const GridFunction& u) {
        MaskedIntegral total;
        for (int axis = 0; axis < u.grid().dim(); ++axis) {
            GridFunction d2 = second_difference(u, axis);
            MaskedIntegral part =
                masked_integral(u, alpha + beta0 < 0.0, [&](std::size_t i) {
                    return abs_power(u[i], alpha + beta0) * abs_power(d2[i], beta);
                });
            total.value += part.value;
            total.masked_fraction = std::max(total.masked_fraction, part.masked_fraction);
        }
        return total;
    };
    if (beta > beta0)
        def.term_b = detail::plain_power_integral(alpha + beta0 + beta);
    return run_inequality(def, corpus, factors, pinned);
}

/// integral |u|^{a+b0+b} <= c * integral |u|^{a+b0} |grad u|^b   (narrow), or
/// integral |u|^{a+b0+b} <= c * integral |u|^a |grad u|^{b0+b}   (wide).
inline InequalityReport verify_zeroth_order_by_gradient(
    const TestCorpus& corpus, double alpha, double beta0, double beta, bool wide = false,
    const std::vector<int>& factors = {1, 2},
    std::optional<FittedConstants> pinned = std::nullopt) {
    detail::require(alpha + beta0 + beta > 1.0,
                    "zeroth-order-by-gradient: need alpha + beta0 + beta > 1");
    detail::require(beta0 >= 0.0 && beta >= 1.0,
                    "zeroth-order-by-gradient: need beta0 >= 0, beta >= 1");
    InequalityDefinition def;
    def.id = wide ? "zeroth-by-gradient-wide" : "zeroth-by-gradient";
    def.description = "zero-order weighted power bounded by a weighted gradient power";
    def.lhs = detail::plain_power_integral(alpha + beta0 + beta);
    if (wide)
        def.term_a = detail::weighted_field_integral(alpha, beta0 + beta,
                                                     detail::grad_mag_field);
    else
        def.term_a = detail::weighted_field_integral(alpha + beta0, beta,
                                                     detail::grad_mag_field);
    return run_inequality(def, corpus, factors, pinned);
}

/// integral |u|^{a0} |grad u|^{b0} <= c * integral |u|^{a1} |grad u|^{b1} + c1,
/// with c1 forced to 0 when the homogeneity degrees match.
inline InequalityReport verify_gradient_comparison(
    const TestCorpus& corpus, double alpha0, double beta0, double alpha1, double beta1,
    const std::vector<int>& factors = {1, 2},
    std::optional<FittedConstants> pinned = std::nullopt) {
    detail::require(1.0 <= alpha0 + beta0 && alpha0 + beta0 <= alpha1 + beta1,
                    "gradient-comparison: need 1 <= alpha0+beta0 <= alpha1+beta1");
    detail::require(1.0 <= beta0 && beta0 <= beta1,
                    "gradient-comparison: need 1 <= beta0 <= beta1");
    detail::require(alpha0 * beta1 >= alpha1 * beta0,
                    "gradient-comparison: need alpha0*beta1 >= alpha1*beta0");
    const bool equal_degree =
        std::abs((alpha0 + beta0) - (alpha1 + beta1)) <= 1e-12 * (alpha1 + beta1);
    InequalityDefinition def;
    def.id = equal_degree ? "gradient-pair" : "gradient-pair-offset";
    def.description = "one weighted gradient power bounded by another";
    def.lhs = detail::weighted_field_integral(alpha0, beta0, detail::grad_mag_field);
    def.term_a = detail::weighted_field_integral(alpha1, beta1, detail::grad_mag_field);
    if (!equal_degree)
        def.term_b = [](const GridFunction&) { return MaskedIntegral{1.0, 0.0}; };
    return run_inequality(def, corpus, factors, pinned);
}

/// integral |u|^{a+b} <= c * integral |u|^a |lap u|^b.
inline InequalityReport verify_function_by_laplacian(
    const TestCorpus& corpus, double alpha, double beta,
    const std::vector<int>& factors = {1, 2},
    std::optional<FittedConstants> pinned = std::nullopt) {
    detail::require(alpha > -1.0, "function-by-laplacian: need alpha > -1");
    detail::require(beta >= 1.0, "function-by-laplacian: need beta >= 1");
    detail::require(alpha + beta >= 2.0, "function-by-laplacian: need alpha + beta >= 2");
    InequalityDefinition def;
    def.id = "func-laplacian";
    def.description = "weighted function power bounded by the weighted Laplacian power";
    def.lhs = detail::plain_power_integral(alpha + beta);
    def.term_a = detail::weighted_field_integral(alpha, beta, detail::laplacian_field);
    return run_inequality(def, corpus, factors, pinned);
}

/// integral |u|^a |grad u|^{2b}
///   <= c1 * integral |u|^{a+b} |lap u|^b + c2 * integral |u|^{a+2b},
/// or the single-constant form with c2 = 0 when pure = true.
inline InequalityReport verify_gradient_power_split(
    const TestCorpus& corpus, double alpha, double beta, bool pure = false,
    const std::vector<int>& factors = {1, 2},
    std::optional<FittedConstants> pinned = std::nullopt) {
    detail::require(alpha > -1.0, "gradient-power-split: need alpha > -1");
    detail::require(beta > detail::dimension_gradient_exponent_floor(corpus.grid.dim()),
                    "gradient-power-split: beta too small for this dimension");
    InequalityDefinition def;
    def.id = pure ? "grad-power-pure" : "grad-power";
    def.description = "gradient fourth-power bounded through the weighted Laplacian";
    def.lhs = detail::weighted_field_integral(alpha, 2.0 * beta, detail::grad_mag_field);
    def.term_a =
        detail::weighted_field_integral(alpha + beta, beta, detail::laplacian_field);
    if (!pure) def.term_b = detail::plain_power_integral(alpha + 2.0 * beta);
    return run_inequality(def, corpus, factors, pinned);
}

/// First-order seminorm with exponents (a1, b1) bounded by the second-order
/// seminorm with exponents (a, b): both sides are homogeneous of degree 1.
inline InequalityReport verify_seminorm_embedding(
    const TestCorpus& corpus, PnParams p, PnParams p1,
    const std::vector<int>& factors = {1, 2},
    std::optional<FittedConstants> pinned = std::nullopt) {
    detail::require(p.alpha >= 0.0 && p1.alpha >= 0.0,
                    "seminorm-embedding: need alpha, alpha1 >= 0");
    detail::require(p1.degree() / p.degree() >= p.beta / p1.beta - 1e-12,
                    "seminorm-embedding: need (a1+b1)/(a+b) >= b/b1");
    detail::require(p.alpha * p1.beta >= p1.alpha * p.beta,
                    "seminorm-embedding: need a*b1 >= a1*b");
    // Boundary case alpha = beta - 1 is admitted: it carries the rho <= 2
    // instances of the second-order class inside the first-order Sobolev scale.
    detail::require(p.alpha >= p.beta - 1.0 - 1e-12,
                    "seminorm-embedding: need alpha >= beta - 1");
    detail::require(p.beta > detail::dimension_gradient_exponent_floor(corpus.grid.dim()),
                    "seminorm-embedding: beta too small for this dimension");
    InequalityDefinition def;
    def.id = "seminorm-embed";
    def.description = "first-order seminorm bounded by the second-order seminorm";
    def.lhs = [p1](const GridFunction& u) {
        return MaskedIntegral{s1_seminorm(u, p1), 0.0};
    };
    def.term_a = [p](const GridFunction& u) {
        return MaskedIntegral{s_delta_seminorm(u, p), 0.0};
    };
    return run_inequality(def, corpus, factors, pinned);
}

/// || lap eta(u) ||_{L_beta} <= C * ([u]_{S-delta})^{(a+b)/b}: the transform
/// of a second-order-class function has an integrable second derivative.
inline InequalityReport verify_transform_regularity(
    const TestCorpus& corpus, PnParams p, const std::vector<int>& factors = {1, 2},
    std::optional<FittedConstants> pinned = std::nullopt) {
    detail::require(p.alpha >= 0.0, "transform-regularity: need alpha >= 0");
    detail::require(p.beta > detail::dimension_gradient_exponent_floor(corpus.grid.dim()),
                    "transform-regularity: beta too small for this dimension");
    InequalityDefinition def;
    def.id = "transform-w2";
    def.description = "second derivative of the power transform controlled by the seminorm";
    def.lhs = [p](const GridFunction& u) {
        GridFunction v = laplacian(eta_transform(u, p));
        return MaskedIntegral{lbeta_norm(v, p.beta), 0.0};
    };
    const double degree = p.degree() / p.beta;
    def.term_a = [p, degree](const GridFunction& u) {
        return MaskedIntegral{std::pow(s_delta_seminorm(u, p), degree), 0.0};
    };
    return run_inequality(def, corpus, factors, pinned);
}

// ---------------------------------------------------------------------------

inline void write_report_csv(const InequalityReport& report, std::ostream& os) {
    os << "function-id,lhs,rhs,ratio\n";
    for (const auto& row : report.rows) {
        if (row.skipped) continue;
        os << row.function_id << ',' << detail::format_double(row.lhs) << ','
           << detail::format_double(row.rhs) << ',' << detail::format_double(row.ratio)
           << '\n';
    }
}

}  // namespace pnlab
