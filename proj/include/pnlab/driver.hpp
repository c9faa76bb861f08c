#pragma once

// Drives a chosen stepper from t = 0 to T, recording the energy, the core
// second-order seminorm, and the running time-integrated seminorm at every
// accepted step. Steps that fail or that grow the amplitude too fast are
// retried with a halved dt (a fixed number of times per step, restarting
// from the configured dt on the next step); an exhausted cascade terminates
// the run, as blow-up when the amplitude has left its initial scale and as a
// solver failure otherwise.

#include "pnlab/dynamics.hpp"
#include "pnlab/galerkin.hpp"
#include "pnlab/spacetime.hpp"
#include "pnlab/steppers.hpp"

#include <functional>
#include <memory>

namespace pnlab {

struct RunResult {
    TrajectoryRecord trajectory;
    BlowupMonitor monitor;
    Admissibility admissibility;
};

namespace detail {

using StepFn = std::function<StepResult(const GridFunction&, double dt, double t_next)>;

/// Largest nodal rate of the destabilizing reaction term; dt times this
/// bound measures how close a lagged step sits to the pole of its
/// linearization (the fully implicit step loses its root near dt*rate ~ 1/4).
inline double reaction_rate_bound(const GridFunction& u, const ProblemSpec& spec) {
    double rate = 0.0;
    if (spec.b_coeff) {
        const GridFunction& b = *spec.b_coeff;
        for (std::size_t i = 0; i < u.size(); ++i)
            rate = std::max(rate, b[i] * abs_power(u[i], spec.rho));
    } else if (spec.b0 != 0.0) {
        for (std::size_t i = 0; i < u.size(); ++i)
            rate = std::max(rate, std::abs(spec.b0) * abs_power(u[i], spec.mu));
    }
    return rate;
}

inline RunResult drive(const ProblemSpec& spec, const SolverConfig& config,
                       const StepFn& step, const EigenPair& eig,
                       bool check_linearization = false) {
    RunResult out{TrajectoryRecord{},
                  BlowupMonitor(spec, eig, config.blowup_amplitude_factor),
                  admissibility(spec)};
    TrajectoryRecorder recorder(out.trajectory, spec);

    GridFunction u = spec.u0;
    double t = 0.0;
    recorder.push(t, u, 0, 0.0);
    out.monitor.observe(t, u);

    const double tiny = 1e-12 * spec.T;
    bool amplitude_grew = false;
    while (t < spec.T - tiny) {
        double dt = std::min(config.dt, spec.T - t);
        const double amp_before = u.max_abs();
        StepResult accepted{u};
        bool have_step = false;
        const double rate = check_linearization ? reaction_rate_bound(u, spec) : 0.0;
        for (int halv = 0; halv <= config.max_step_halvings; ++halv) {
            StepResult r = step(u, dt, t + dt);
            if (r.ok) {
                const double amp_after = r.u.max_abs();
                const bool too_fast = amp_before > 0.0 &&
                                      amp_after > config.growth_reject_factor * amp_before;
                bool resolved = !too_fast;
                if (resolved && dt * rate > 0.15) {
                    // lagged coefficients near the pole of their linearization
                    // quietly step across a singularity; cross-check against
                    // the fully implicit step, whose root is lost there
                    StepResult rn = step_implicit_newton(u, spec, dt, t + dt, config.newton);
                    if (!rn.ok) {
                        resolved = false;
                    } else {
                        const double scale = std::max({l2_norm(rn.u), l2_norm(u), 1e-300});
                        resolved =
                            l2_norm(r.u - rn.u) / scale <= config.step_error_reject_tol;
                    }
                }
                if (resolved) {
                    accepted = std::move(r);
                    have_step = true;
                    break;
                }
                if (amp_after > amp_before) amplitude_grew = true;
            }
            dt *= 0.5;
        }
        if (!have_step) {
            out.monitor.mark_cascade_exhausted(t);
            const double amp_now = u.max_abs();
            const double ref = std::max(spec.u0.max_abs(), 1e-300);
            if (amplitude_grew || amp_now > 10.0 * ref) {
                out.trajectory.status = TerminationStatus::blow_up_detected;
                out.trajectory.blowup_time = t;
            } else {
                out.trajectory.status = TerminationStatus::solver_failure;
                out.trajectory.failure_note = "step-halving cascade exhausted at t = " +
                                              std::to_string(t);
            }
            return out;
        }

        t += dt;
        GridFunction defect = residual(accepted.u, spec, t);
        const GridFunction& prev = out.trajectory.states.back();
        for (std::size_t i = 0; i < defect.size(); ++i)
            defect[i] += (accepted.u[i] - prev[i]) / dt;
        u = accepted.u;
        recorder.push(t, u, accepted.newton_iters, l2_norm(defect));
        if (out.monitor.observe(t, u)) {
            out.trajectory.status = TerminationStatus::blow_up_detected;
            out.trajectory.blowup_time = t;
            return out;
        }
    }
    out.trajectory.status = TerminationStatus::completed;
    return out;
}

}  // namespace detail

/// Run the configured solver over [0, T]. For the elliptic-regularized
/// method the trajectory at the smallest epsilon is returned; use
/// solve_elliptic_regularized directly for the whole family.
inline RunResult run_trajectory(const ProblemSpec& spec, const SolverConfig& config,
                                const EigenPair* precomputed_eig = nullptr) {
    spec.validate();
    config.validate();
    EigenPair eig = precomputed_eig ? *precomputed_eig : first_eigenpair(spec.grid());

    switch (config.method) {
        case Method::semi_implicit:
            return detail::drive(
                spec, config,
                [&spec](const GridFunction& u, double dt, double t_next) {
                    return step_semi_implicit(u, spec, dt, t_next);
                },
                eig, /*check_linearization=*/true);
        case Method::implicit_newton:
            return detail::drive(
                spec, config,
                [&spec, &config](const GridFunction& u, double dt, double t_next) {
                    return step_implicit_newton(u, spec, dt, t_next, config.newton);
                },
                eig);
        case Method::galerkin: {
            auto basis = std::make_shared<GalerkinBasis>(
                make_sine_basis(spec.grid(), config.galerkin_m));
            return detail::drive(
                spec, config,
                [&spec, &config, basis](const GridFunction& u, double dt, double t_next) {
                    return step_galerkin(*basis, u, spec, dt, t_next, config.newton);
                },
                eig);
        }
        case Method::elliptic_regularized: {
            RegularizedFamily family = solve_elliptic_regularized(spec, config);
            RunResult out{TrajectoryRecord{},
                          BlowupMonitor(spec, eig, config.blowup_amplitude_factor),
                          admissibility(spec)};
            if (family.trajectories.empty()) {
                out.trajectory.status = TerminationStatus::solver_failure;
                out.trajectory.failure_note = family.note;
                return out;
            }
            out.trajectory = family.trajectories.back();
            if (!family.complete) {
                out.trajectory.status = TerminationStatus::solver_failure;
                out.trajectory.failure_note = family.note;
            }
            for (std::size_t k = 0; k < out.trajectory.times.size(); ++k)
                out.monitor.observe(out.trajectory.times[k], out.trajectory.states[k]);
            return out;
        }
    }
    throw std::logic_error("run_trajectory: unhandled method");
}

}  // namespace pnlab
