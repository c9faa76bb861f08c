#pragma once

// Time-stamped solution records with per-step diagnostics, plus the L2(Q)
// space-time norms used to compare trajectories from different solvers.

#include "pnlab/pn_space.hpp"
#include "pnlab/problem.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace pnlab {

enum class TerminationStatus { completed, blow_up_detected, solver_failure };

inline const char* to_string(TerminationStatus s) {
    switch (s) {
        case TerminationStatus::completed: return "completed";
        case TerminationStatus::blow_up_detected: return "blow-up-detected";
        case TerminationStatus::solver_failure: return "solver-failure";
    }
    return "unknown";
}

struct StepDiagnostics {
    double t = 0.0;
    double phi = 0.0;             // half the squared L2 norm
    double s_delta_core = 0.0;    // weighted-Laplacian seminorm of the slice
    double bochner_running = 0.0; // running time-integrated seminorm, p = rho+2
    double step_residual = 0.0;   // implicit-equation defect of the accepted state
    int newton_iters = 0;
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<GridFunction> states;
    std::vector<StepDiagnostics> diagnostics;
    TerminationStatus status = TerminationStatus::completed;
    double blowup_time = -1.0;
    std::string failure_note;

    const GridFunction& final_state() const { return states.back(); }
};

/// Trapezoid-in-time L2(Q) norm of a trajectory.
inline double l2q_norm(const TrajectoryRecord& traj) {
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < traj.times.size(); ++k) {
        const double dt = traj.times[k + 1] - traj.times[k];
        const double a = inner(traj.states[k], traj.states[k]);
        const double b = inner(traj.states[k + 1], traj.states[k + 1]);
        total += 0.5 * dt * (a + b);
    }
    return std::sqrt(total);
}

/// L2(Q) distance of two trajectories sampled at matching times.
inline double l2q_distance(const TrajectoryRecord& a, const TrajectoryRecord& b) {
    if (a.times.size() != b.times.size())
        throw std::invalid_argument("l2q_distance: trajectories have different lengths");
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < a.times.size(); ++k) {
        if (std::abs(a.times[k] - b.times[k]) > 1e-9 * std::max(1.0, std::abs(a.times[k])))
            throw std::invalid_argument("l2q_distance: time grids do not match");
        GridFunction d0 = a.states[k] - b.states[k];
        GridFunction d1 = a.states[k + 1] - b.states[k + 1];
        const double dt = a.times[k + 1] - a.times[k];
        total += 0.5 * dt * (inner(d0, d0) + inner(d1, d1));
    }
    return std::sqrt(total);
}

/// Keep every stride-th sample (plus the final one) of a trajectory.
inline TrajectoryRecord subsample(const TrajectoryRecord& traj, std::size_t stride) {
    TrajectoryRecord out;
    out.status = traj.status;
    out.blowup_time = traj.blowup_time;
    out.failure_note = traj.failure_note;
    for (std::size_t k = 0; k < traj.times.size(); k += stride) {
        out.times.push_back(traj.times[k]);
        out.states.push_back(traj.states[k]);
        if (k < traj.diagnostics.size()) out.diagnostics.push_back(traj.diagnostics[k]);
    }
    if (out.times.back() != traj.times.back()) {
        out.times.push_back(traj.times.back());
        out.states.push_back(traj.states.back());
        out.diagnostics.push_back(traj.diagnostics.back());
    }
    return out;
}

namespace detail {

/// Appends one accepted state with its diagnostics; maintains the running
/// Bochner integral of the core seminorm raised to p = rho + 2.
class TrajectoryRecorder {
public:
    TrajectoryRecorder(TrajectoryRecord& record, const ProblemSpec& spec)
        : record_(record), spec_(spec), p_(spec.rho + 2.0) {}

    void push(double t, const GridFunction& u, int newton_iters, double step_residual) {
        StepDiagnostics d;
        d.t = t;
        d.phi = 0.5 * inner(u, u);
        d.s_delta_core = s_delta_core_seminorm(u, spec_.rho);
        d.newton_iters = newton_iters;
        d.step_residual = step_residual;
        const double powered = std::pow(d.s_delta_core, p_);
        if (!record_.times.empty()) {
            const double dt = t - record_.times.back();
            integral_ += 0.5 * dt * (last_powered_ + powered);
        }
        last_powered_ = powered;
        d.bochner_running = std::pow(integral_, 1.0 / p_);
        record_.times.push_back(t);
        record_.states.push_back(u);
        record_.diagnostics.push_back(d);
    }

private:
    TrajectoryRecord& record_;
    const ProblemSpec& spec_;
    double p_;
    double integral_ = 0.0;
    double last_powered_ = 0.0;
};

}  // namespace detail

}  // namespace pnlab
