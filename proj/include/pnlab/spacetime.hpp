#pragma once

// Elliptic regularization in time: solve the space-time boundary value
// problem
//   -eps u_tt + u_t + f(u) = y,   u(0) = u0,   u_t(T) = 0,
// by damped Newton on the central-difference discretization, continuing the
// solution down a decreasing epsilon schedule. Also provides the scalar
// two-point problem -eps x'' + x' = f0, x(0) = 0, x'(T) = 0 and the
// exponential-kernel formula for its velocity, which cross-check each other.

#include "pnlab/problem.hpp"
#include "pnlab/solver_config.hpp"
#include "pnlab/steppers.hpp"
#include "pnlab/trajectory.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <vector>

namespace pnlab {

inline constexpr std::size_t kSpaceTimeUnknownCap = 100000;

struct RegularizedFamily {
    std::vector<double> epsilons;               // solved entries, largest first
    std::vector<TrajectoryRecord> trajectories; // one per solved epsilon
    bool complete = false;                      // whole schedule solved
    std::string note;
};

namespace detail {

/// Global residual of the space-time system. Unknowns are the slices
/// u^1..u^S at t_1..t_S (t_S = T); u^0 = u0 is data. Rows s = 1..S-1 carry
/// the PDE, row S the one-sided discrete Neumann condition u_t(T) = 0.
class SpaceTimeSystem {
public:
    SpaceTimeSystem(const ProblemSpec& spec, int n_steps)
        : spec_(spec), n_(static_cast<int>(spec.grid().size())), s_(n_steps),
          dt_(spec.T / n_steps) {
        if (static_cast<std::size_t>(n_) * s_ > kSpaceTimeUnknownCap)
            throw std::invalid_argument(
                "space-time solve refused: " + std::to_string(std::size_t(n_) * s_) +
                " unknowns exceeds the cap of " + std::to_string(kSpaceTimeUnknownCap));
        sources_.reserve(s_);
        for (int s = 1; s <= s_; ++s) sources_.push_back(spec.sample_source(s * dt_));
    }

    int rows() const { return n_ * s_; }
    int n_steps() const { return s_; }
    double dt() const { return dt_; }

    GridFunction slice(const Eigen::VectorXd& U, int s) const {
        GridFunction u(spec_.grid());
        if (s == 0) return spec_.u0;
        std::copy(U.data() + (s - 1) * n_, U.data() + s * n_, u.values().begin());
        return u;
    }

    Eigen::VectorXd residual(const Eigen::VectorXd& U, double eps) const {
        Eigen::VectorXd r(rows());
        const double idt2 = 1.0 / (dt_ * dt_);
        const double i2dt = 1.0 / (2.0 * dt_);
        for (int s = 1; s < s_; ++s) {
            GridFunction us = slice(U, s);
            GridFunction f = apply_spatial_operator(us, spec_);
            const int o = (s - 1) * n_;
            for (int i = 0; i < n_; ++i) {
                const double um = s == 1 ? spec_.u0[i] : U[o - n_ + i];
                const double up = U[o + n_ + i];
                const double uc = U[o + i];
                r[o + i] = -eps * (up - 2.0 * uc + um) * idt2 + (up - um) * i2dt + f[i] -
                           (spec_.has_source() ? sources_[s - 1][i] : 0.0);
            }
        }
        // second-order one-sided Neumann closure at t = T
        const int o = (s_ - 1) * n_;
        for (int i = 0; i < n_; ++i) {
            const double um2 = s_ >= 3 ? U[o - 2 * n_ + i] : spec_.u0[i];
            r[o + i] = (3.0 * U[o + i] - 4.0 * U[o - n_ + i] + um2) / (2.0 * dt_);
        }
        return r;
    }

    Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& U, double eps) const {
        const double idt2 = 1.0 / (dt_ * dt_);
        const double i2dt = 1.0 / (2.0 * dt_);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(rows()) * 7);
        for (int s = 1; s < s_; ++s) {
            GridFunction us = slice(U, s);
            const int o = (s - 1) * n_;
            append_spatial_jacobian(trip, us, spec_, o);
            for (int i = 0; i < n_; ++i) {
                trip.emplace_back(o + i, o + i, 2.0 * eps * idt2);
                if (s > 1) trip.emplace_back(o + i, o - n_ + i, -eps * idt2 - i2dt);
                trip.emplace_back(o + i, o + n_ + i, -eps * idt2 + i2dt);
            }
        }
        const int o = (s_ - 1) * n_;
        for (int i = 0; i < n_; ++i) {
            trip.emplace_back(o + i, o + i, 1.5 / dt_);
            trip.emplace_back(o + i, o - n_ + i, -2.0 / dt_);
            if (s_ >= 3) trip.emplace_back(o + i, o - 2 * n_ + i, 0.5 / dt_);
        }
        Eigen::SparseMatrix<double> J(rows(), rows());
        J.setFromTriplets(trip.begin(), trip.end());
        return J;
    }

    TrajectoryRecord to_trajectory(const Eigen::VectorXd& U, int newton_iters,
                                   double final_residual) const {
        TrajectoryRecord rec;
        pnlab::detail::TrajectoryRecorder recorder(rec, spec_);
        for (int s = 0; s <= s_; ++s)
            recorder.push(s * dt_, slice(U, s), newton_iters, final_residual);
        return rec;
    }

private:
    const ProblemSpec& spec_;
    int n_;
    int s_;
    double dt_;
    std::vector<GridFunction> sources_;
};

inline bool spacetime_newton(const SpaceTimeSystem& sys, double eps, Eigen::VectorXd& U,
                             const NewtonParams& np, int& iters, double& final_norm) {
    const double scale = 1.0 + std::sqrt(static_cast<double>(sys.rows()));
    Eigen::VectorXd G = sys.residual(U, eps);
    double gnorm = G.norm();
    iters = 0;
    for (int it = 0; it < np.max_iters; ++it) {
        if (gnorm <= np.tol * scale) break;
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(sys.jacobian(U, eps));
        if (lu.info() != Eigen::Success) return false;
        Eigen::VectorXd step = lu.solve(G);
        if (!step.allFinite()) return false;
        double lambda = 1.0;
        bool accepted = false;
        Eigen::VectorXd Ut, Gt;
        double gt = 0.0;
        for (int back = 0; back < 30; ++back) {
            Ut = U - lambda * step;
            Gt = sys.residual(Ut, eps);
            gt = Gt.norm();
            if (std::isfinite(gt) && gt < gnorm) {
                accepted = true;
                break;
            }
            lambda *= np.damping;
        }
        if (!accepted) return false;
        U = Ut;
        G = Gt;
        gnorm = gt;
        iters = it + 1;
    }
    final_norm = gnorm;
    return gnorm <= np.tol * scale;
}

}  // namespace detail

/// Solve the regularized space-time problem for every epsilon in the
/// schedule (largest first), warm-starting each solve from the previous one.
/// The first solve is warm-started from a lagged time-stepping sweep. On a
/// Newton failure the family collected so far is returned with a note.
inline RegularizedFamily solve_elliptic_regularized(const ProblemSpec& spec,
                                                    const SolverConfig& config) {
    config.validate();
    if (config.epsilon_schedule.empty())
        throw std::invalid_argument("solve_elliptic_regularized: empty epsilon schedule");
    const int n_steps = static_cast<int>(std::lround(spec.T / config.dt));
    if (n_steps < 2)
        throw std::invalid_argument("solve_elliptic_regularized: need at least 2 time steps");
    detail::SpaceTimeSystem sys(spec, n_steps);

    // warm start from the lagged one-step scheme
    Eigen::VectorXd U(sys.rows());
    {
        GridFunction u = spec.u0;
        const int n = static_cast<int>(spec.grid().size());
        for (int s = 1; s <= sys.n_steps(); ++s) {
            StepResult r = step_semi_implicit(u, spec, sys.dt(), s * sys.dt());
            if (r.ok) u = r.u;
            for (int i = 0; i < n; ++i) U[(s - 1) * n + i] = u[i];
        }
    }

    RegularizedFamily family;
    for (double eps : config.epsilon_schedule) {
        int iters = 0;
        double final_norm = 0.0;
        const bool ok = detail::spacetime_newton(sys, eps, U, config.newton, iters, final_norm);
        if (!ok) {
            family.note = "Newton failed at epsilon = " + std::to_string(eps);
            return family;
        }
        family.epsilons.push_back(eps);
        family.trajectories.push_back(sys.to_trajectory(U, iters, final_norm));
    }
    family.complete = true;
    return family;
}

// ---------------------------------------------------------------------------
// Scalar core of the regularized problem.

/// Central-difference solve of -eps x'' + x' = f0 on a uniform time grid with
/// x(0) = 0 and the one-sided Neumann closure at t = T. `f0` holds samples at
/// all nodes t_0..t_S; returns x at the same nodes.
inline std::vector<double> solve_scalar_two_point(const std::vector<double>& f0, double T,
                                                  double eps) {
    const int s_count = static_cast<int>(f0.size()) - 1;
    if (s_count < 2) throw std::invalid_argument("solve_scalar_two_point: need >= 3 samples");
    const double dt = T / s_count;
    const double idt2 = 1.0 / (dt * dt);
    const double i2dt = 1.0 / (2.0 * dt);
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs(s_count);
    for (int s = 1; s < s_count; ++s) {
        const int r = s - 1;
        trip.emplace_back(r, r, 2.0 * eps * idt2);
        if (s > 1) trip.emplace_back(r, r - 1, -eps * idt2 - i2dt);
        trip.emplace_back(r, r + 1, -eps * idt2 + i2dt);
        rhs[r] = f0[s];
    }
    trip.emplace_back(s_count - 1, s_count - 1, 1.5 / dt);
    trip.emplace_back(s_count - 1, s_count - 2, -2.0 / dt);
    if (s_count >= 3) trip.emplace_back(s_count - 1, s_count - 3, 0.5 / dt);
    rhs[s_count - 1] = 0.0;
    Eigen::SparseMatrix<double> A(s_count, s_count);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("solve_scalar_two_point: factorization failed");
    Eigen::VectorXd x = lu.solve(rhs);
    std::vector<double> out(f0.size(), 0.0);
    for (int s = 1; s <= s_count; ++s) out[s] = x[s - 1];
    return out;
}

/// Exponential-kernel velocity of the scalar problem:
///   x'(t) = (1/eps) * integral_0^{T-t} f0(T - tau) exp(-(T - t - tau)/eps) dtau,
/// evaluated exactly on the piecewise-linear interpolant of the f0 samples
/// (equivalently (1/eps) integral_t^T f0(s) exp(-(s-t)/eps) ds).
inline double regularized_kernel_velocity(const std::vector<double>& times,
                                          const std::vector<double>& f0, double eps,
                                          double t) {
    if (times.size() != f0.size() || times.size() < 2)
        throw std::invalid_argument("regularized_kernel_velocity: bad sample arrays");
    if (!(eps > 0.0))
        throw std::invalid_argument("regularized_kernel_velocity: eps must be > 0");
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        double a = times[k], b = times[k + 1];
        if (b <= t) continue;
        double fa = f0[k], fb = f0[k + 1];
        const double q = (fb - fa) / (b - a);  // slope of the interpolant
        if (a < t) {
            fa += q * (t - a);
            a = t;
        }
        // (1/eps) int_a^b (fa + q (s - a)) e^{-(s-t)/eps} ds with w = (s-t)/eps
        const double wa = (a - t) / eps;
        const double wb = (b - t) / eps;
        const double e0 = std::exp(-wa) - std::exp(-wb);
        const double e1 = (wa + 1.0) * std::exp(-wa) - (wb + 1.0) * std::exp(-wb);
        total += (fa + q * (t - a)) * e0 + q * eps * e1;
    }
    return total;
}

}  // namespace pnlab
