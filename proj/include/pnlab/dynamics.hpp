#pragma once

// Long-time behavior toolkit: the energy Phi(t) = ||u(t)||^2 / 2, the sharp
// Gronwall-type decay bound y(t) <= (eta/theta)^{1/l} + (theta (l-1) t)^{-1/(l-1)}
// for y' + theta y^l <= eta, envelope/slope fits of computed trajectories,
// the bounded-versus-blow-up regime test M = c (rho+2)^2 / (4 (rho+1)) vs the
// first eigenvalue, and a streaming blow-up monitor.

#include "pnlab/problem.hpp"
#include "pnlab/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace pnlab {

/// Phi(u) = half the squared quadrature L2 norm.
inline double phi(const GridFunction& u) { return 0.5 * inner(u, u); }

/// Parameters of the comparison inequality y' + theta y^l <= eta_const.
/// (The additive constant is named eta_const; the power transform eta(u)
/// is unrelated.)
struct GronwallParams {
    double theta;
    double l;
    double eta_const;

    GronwallParams(double theta_, double l_, double eta_)
        : theta(theta_), l(l_), eta_const(eta_) {
        if (!(l > 1.0)) throw std::invalid_argument("GronwallParams: l must be > 1");
        if (!(theta > 0.0)) throw std::invalid_argument("GronwallParams: theta must be > 0");
        if (!(eta_const >= 0.0))
            throw std::invalid_argument("GronwallParams: eta must be >= 0");
    }
};

/// Sharp decay bound; diverges as t -> 0+, so t must be positive.
inline double ghidaglia_bound(const GronwallParams& p, double t) {
    if (!(t > 0.0))
        throw std::invalid_argument("ghidaglia_bound: t must be > 0 (bound diverges at 0)");
    const double equilibrium = std::pow(p.eta_const / p.theta, 1.0 / p.l);
    const double power = std::pow(p.theta * (p.l - 1.0) * t, -1.0 / (p.l - 1.0));
    return equilibrium + power;
}

struct GronwallCheck {
    int violations = 0;
    double max_excess = 0.0;  // max of y(t) - bound(t) over checked samples
    std::vector<double> times;
    std::vector<double> values;
};

/// Integrate the extremal comparison equation y' = eta - theta y^l from
/// y(0) = y0 with an adaptive RK4 and check y(t) <= bound(t) + margin at all
/// sample times past check_from (the bound itself diverges at t = 0).
inline GronwallCheck verify_ghidaglia(const GronwallParams& p, double y0, double T,
                                      double margin = 1e-8, double check_from = 1e-3) {
    if (!(y0 > 0.0)) throw std::invalid_argument("verify_ghidaglia: y0 must be > 0");
    GronwallCheck out;
    auto f = [&](double y) { return p.eta_const - p.theta * std::pow(std::max(y, 0.0), p.l); };

    const double sample_dt = T / 400.0;
    double next_sample = 0.0;
    double t = 0.0, y = y0;
    while (t < T) {
        // step limited by the local decay timescale 1 / (theta l y^{l-1})
        const double rate = p.theta * p.l * std::pow(std::max(y, 1e-300), p.l - 1.0) + 1.0;
        double dt = std::min(sample_dt, 0.05 / rate);
        dt = std::min(dt, T - t);
        const double k1 = f(y);
        const double k2 = f(y + 0.5 * dt * k1);
        const double k3 = f(y + 0.5 * dt * k2);
        const double k4 = f(y + dt * k3);
        y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        y = std::max(y, 0.0);
        t += dt;
        if (t >= next_sample) {
            out.times.push_back(t);
            out.values.push_back(y);
            next_sample += sample_dt;
            if (t >= check_from) {
                const double excess = y - ghidaglia_bound(p, t);
                out.max_excess = std::max(out.max_excess, excess);
                if (excess > margin) ++out.violations;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Decay envelope of computed trajectories.

struct DecayRecord {
    enum class Status { ok, inconclusive };
    Status status = Status::inconclusive;
    double slope = 0.0;            // fitted tail slope of log Phi vs log t
    double expected_slope = 0.0;   // -2/rho, meaningful for the source-free case
    bool slope_in_band = false;    // |slope - expected| <= 0.3 (source-free only)
    double plateau = 0.0;          // fitted forced level (0 without source)
    double envelope_c1 = 0.0;      // fitted decay constant of the power term
    bool envelope_violation = false;
    std::vector<double> tail_times;
    std::vector<double> tail_phi;
    std::vector<double> envelope;  // plateau + (c1 (rho/2) t)^{-2/rho} at tail times
};

/// Fit the tail of log Phi vs log t over the last decade [T/10, T] (at least
/// 20 samples required) and fit the envelope constants.
inline DecayRecord decay_study(const TrajectoryRecord& traj, const ProblemSpec& spec,
                               double slope_band = 0.3) {
    DecayRecord rec;
    rec.expected_slope = -2.0 / spec.rho;
    if (traj.times.size() < 2) return rec;
    const double T = traj.times.back();
    const double t_min = T / 10.0;
    if (traj.times.front() > t_min) return rec;  // less than a decade recorded

    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        if (traj.times[k] < t_min) continue;
        const double p = traj.diagnostics[k].phi;
        if (p <= 0.0) continue;
        rec.tail_times.push_back(traj.times[k]);
        rec.tail_phi.push_back(p);
    }
    if (rec.tail_times.size() < 20) return rec;

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto m = static_cast<double>(rec.tail_times.size());
    for (std::size_t i = 0; i < rec.tail_times.size(); ++i) {
        const double x = std::log(rec.tail_times[i]);
        const double y = std::log(rec.tail_phi[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    rec.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    rec.status = DecayRecord::Status::ok;

    const bool source_free = !spec.has_source() && spec.b0 == 0.0 && !spec.b_coeff;
    if (source_free) rec.slope_in_band = std::abs(rec.slope - rec.expected_slope) <= slope_band;

    // Envelope plateau + (c1 (rho/2) t)^{-2/rho}: without a source the plateau
    // is 0; with one, take the late-time level. c1 is the largest constant for
    // which the envelope still dominates every tail sample.
    rec.plateau = source_free ? 0.0 : rec.tail_phi.back();
    double c1 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rec.tail_times.size(); ++i) {
        const double excess = rec.tail_phi[i] - rec.plateau;
        if (excess <= 0.0) continue;
        const double cand =
            std::pow(excess, -spec.rho / 2.0) / ((spec.rho / 2.0) * rec.tail_times[i]);
        c1 = std::min(c1, cand);
    }
    rec.envelope_c1 = std::isfinite(c1) ? c1 : 0.0;
    for (std::size_t i = 0; i < rec.tail_times.size(); ++i) {
        double env = rec.plateau;
        if (rec.envelope_c1 > 0.0)
            env += std::pow(rec.envelope_c1 * (spec.rho / 2.0) * rec.tail_times[i],
                            -2.0 / spec.rho);
        rec.envelope.push_back(env);
        if (rec.tail_phi[i] > env * (1.0 + 1e-6) + 1e-12) rec.envelope_violation = true;
    }
    return rec;
}

// ---------------------------------------------------------------------------
// Bounded / blow-up regime classification for the b(x)-variant problem.

enum class Regime { bounded, indeterminate, blow_up_candidate };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::bounded: return "bounded";
        case Regime::indeterminate: return "indeterminate";
        case Regime::blow_up_candidate: return "blow-up-candidate";
    }
    return "unknown";
}

struct BlowupCriterion {
    double M = 0.0;        // ||b||_inf (rho+2)^2 / (4 (rho+1))
    double lambda1 = 0.0;  // continuum first eigenvalue
    Regime regime = Regime::indeterminate;
    double delta = 0.0;    // min b(x) - lambda1 when positive
};

/// Pure function of (b, rho, lambda1, u0): bounded when M < lambda1;
/// blow-up candidate when b - lambda1 >= delta > 0 with positive data.
inline BlowupCriterion classify_regime(const ProblemSpec& spec, const EigenPair& eig) {
    if (!spec.b_coeff)
        throw std::invalid_argument("classify_regime: needs the b(x)-variant problem");
    const GridFunction& b = *spec.b_coeff;
    double b_max = 0.0, b_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i] < 0.0)
            throw std::invalid_argument("classify_regime: b(x) must be nonnegative");
        b_max = std::max(b_max, b[i]);
        b_min = std::min(b_min, b[i]);
    }
    bool u0_positive = true, u0_nonneg = true;
    for (std::size_t i = 0; i < spec.u0.size(); ++i) {
        if (spec.u0[i] <= 0.0) u0_positive = false;
        if (spec.u0[i] < 0.0) u0_nonneg = false;
    }
    if (!u0_nonneg)
        throw std::invalid_argument("classify_regime: needs u0 >= 0");

    BlowupCriterion crit;
    crit.lambda1 = eig.lambda_continuum;
    crit.M = b_max * (spec.rho + 2.0) * (spec.rho + 2.0) / (4.0 * (spec.rho + 1.0));
    if (crit.M < crit.lambda1) {
        crit.regime = Regime::bounded;
    } else if (b_min - crit.lambda1 > 0.0 && u0_positive) {
        crit.regime = Regime::blow_up_candidate;
        crit.delta = b_min - crit.lambda1;
    }
    return crit;
}

// ---------------------------------------------------------------------------
// Streaming blow-up detection.

/// Watches max|u| against an amplitude threshold anchored at max|u0| (or the
/// first nonzero state when u0 == 0) and records <u, v1> together with the
/// diagnostic functional <u^{1-rho}, v1>/(1-rho) on positive states; the
/// functional degenerates to <log u, v1> at rho = 1.
class BlowupMonitor {
public:
    BlowupMonitor(const ProblemSpec& spec, EigenPair eig, double amplitude_factor = 1e6)
        : rho_(spec.rho),
          eig_(std::move(eig)),
          factor_(amplitude_factor),
          ref_scale_(spec.u0.max_abs()) {}

    /// Returns true when the amplitude threshold is crossed.
    bool observe(double t, const GridFunction& u) {
        const double amp = u.max_abs();
        if (ref_scale_ == 0.0 && amp > 0.0) ref_scale_ = amp;
        times_.push_back(t);
        ip_v1_.push_back(inner(u, eig_.v1));
        diagnostic_.push_back(remark_functional(u));
        if (ref_scale_ > 0.0 && amp > factor_ * ref_scale_) {
            triggered_ = true;
            trigger_time_ = t;
        }
        return triggered_;
    }

    /// Called when the step-halving cascade is exhausted: the trajectory can
    /// no longer be continued, which is itself the blow-up signal.
    void mark_cascade_exhausted(double t) {
        triggered_ = true;
        trigger_time_ = t;
    }

    bool triggered() const { return triggered_; }
    double trigger_time() const { return trigger_time_; }
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& ip_v1() const { return ip_v1_; }
    const std::vector<double>& diagnostic() const { return diagnostic_; }
    const EigenPair& eigenpair() const { return eig_; }

    bool ip_v1_monotone_increasing(double tol = 1e-10) const {
        for (std::size_t i = 0; i + 1 < ip_v1_.size(); ++i)
            if (ip_v1_[i + 1] < ip_v1_[i] - tol * std::max(1.0, std::abs(ip_v1_[i])))
                return false;
        return true;
    }

private:
    double remark_functional(const GridFunction& u) const {
        const double cut = 1e-8 * std::max(u.max_abs(), 1e-300);
        double s = 0.0;
        bool positive = true;
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (u[i] <= cut) {
                positive = false;
                break;
            }
            if (std::abs(1.0 - rho_) < 1e-12)
                s += std::log(u[i]) * eig_.v1[i];
            else
                s += std::pow(u[i], 1.0 - rho_) / (1.0 - rho_) * eig_.v1[i];
        }
        if (!positive) return std::numeric_limits<double>::quiet_NaN();
        return s * u.grid().cell_volume();
    }

    double rho_;
    EigenPair eig_;
    double factor_;
    double ref_scale_;
    bool triggered_ = false;
    double trigger_time_ = -1.0;
    std::vector<double> times_;
    std::vector<double> ip_v1_;
    std::vector<double> diagnostic_;
};

}  // namespace pnlab
