#pragma once

// One-step integrators for the degenerate evolution problem, both built on
// backward Euler: a lagged-coefficient (semi-implicit) step whose linear
// system is a single banded solve, and a fully implicit step solved by
// damped Newton with the analytic Jacobian.
//
// The degenerate factor |u|^rho never scales the I/dt term, so u == 0 stays
// an exact fixed point and the linear systems remain solvable there.

#include "pnlab/problem.hpp"
#include "pnlab/solver_config.hpp"
#include "pnlab/trajectory.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace pnlab {

struct StepResult {
    GridFunction u;
    bool ok = false;
    int newton_iters = 0;
    std::string note;
};

namespace detail {

using SpMat = Eigen::SparseMatrix<double>;

/// Assemble I/dt - diag(|u_n|^rho) lap_h + diag(reaction) as a sparse matrix.
/// The reaction multiplier is the secant form m = b0 |u_n|^mu sign(u_n)
/// (resp. -b(x) |u_n|^rho sign(u_n)), chosen so m * u_n reproduces the
/// nonlinear term exactly at u_{n+1} = u_n.
inline SpMat lagged_system_matrix(const GridFunction& un, const ProblemSpec& spec,
                                  double dt) {
    const Grid& g = un.grid();
    const int nx = g.n_cells(0), ny = g.n_cells(1);
    const double ihx2 = 1.0 / (g.spacing(0) * g.spacing(0));
    const double ihy2 = g.dim() == 2 ? 1.0 / (g.spacing(1) * g.spacing(1)) : 0.0;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(g.size() * 5);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const auto row = static_cast<int>(g.index(ix, iy));
            const double a = abs_power(un[row], spec.rho);
            double diag = 1.0 / dt + 2.0 * a * ihx2 + (g.dim() == 2 ? 2.0 * a * ihy2 : 0.0);
            if (spec.b_coeff)
                diag += -(*spec.b_coeff)[row] * signed_power(un[row], spec.rho);
            else
                diag += spec.b0 * signed_power(un[row], spec.mu);
            trip.emplace_back(row, row, diag);
            if (ix > 0) trip.emplace_back(row, row - 1, -a * ihx2);
            if (ix < nx - 1) trip.emplace_back(row, row + 1, -a * ihx2);
            if (g.dim() == 2 && iy > 0) trip.emplace_back(row, row - nx, -a * ihy2);
            if (g.dim() == 2 && iy < ny - 1) trip.emplace_back(row, row + nx, -a * ihy2);
        }
    SpMat A(static_cast<int>(g.size()), static_cast<int>(g.size()));
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

/// Append the triplets of the spatial-operator Jacobian J_f(u) shifted by a
/// row/column offset. The derivative of the degenerate factor,
/// rho |u|^{rho-1} sign(u) lap u, is masked to 0 where |u| < 1e-12 to avoid
/// the singular power.
inline void append_spatial_jacobian(std::vector<Eigen::Triplet<double>>& trip,
                                    const GridFunction& u, const ProblemSpec& spec,
                                    int offset = 0) {
    const Grid& g = u.grid();
    const int nx = g.n_cells(0), ny = g.n_cells(1);
    const double ihx2 = 1.0 / (g.spacing(0) * g.spacing(0));
    const double ihy2 = g.dim() == 2 ? 1.0 / (g.spacing(1) * g.spacing(1)) : 0.0;
    GridFunction lap = laplacian(u);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const auto i = static_cast<int>(g.index(ix, iy));
            const int row = offset + i;
            const double ui = u[i];
            const double a = abs_power(ui, spec.rho);
            double diag = 2.0 * a * ihx2 + (g.dim() == 2 ? 2.0 * a * ihy2 : 0.0);
            if (std::abs(ui) >= 1e-12) {
                const double sgn = ui > 0.0 ? 1.0 : -1.0;
                diag += -spec.rho * abs_power(ui, spec.rho - 1.0) * sgn * lap[i];
                if (spec.b_coeff)
                    diag += -(*spec.b_coeff)[i] * (spec.rho + 1.0) *
                            abs_power(ui, spec.rho) * sgn;
                else
                    diag += spec.b0 * (spec.mu + 1.0) * abs_power(ui, spec.mu) * sgn;
            }
            trip.emplace_back(row, row, diag);
            if (ix > 0) trip.emplace_back(row, row - 1, -a * ihx2);
            if (ix < nx - 1) trip.emplace_back(row, row + 1, -a * ihx2);
            if (g.dim() == 2 && iy > 0) trip.emplace_back(row, row - nx, -a * ihy2);
            if (g.dim() == 2 && iy < ny - 1) trip.emplace_back(row, row + nx, -a * ihy2);
        }
}

/// Jacobian of G(u) = u/dt + f(u) - rhs at u.
inline SpMat newton_jacobian(const GridFunction& u, const ProblemSpec& spec, double dt) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(u.size() * 5);
    append_spatial_jacobian(trip, u, spec);
    for (int i = 0; i < static_cast<int>(u.size()); ++i)
        trip.emplace_back(i, i, 1.0 / dt);
    SpMat J(static_cast<int>(u.size()), static_cast<int>(u.size()));
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
}

}  // namespace detail

/// Lagged-coefficient backward-Euler step: a single linear solve with the
/// nonlinear coefficients frozen at u_n.
inline StepResult step_semi_implicit(const GridFunction& un, const ProblemSpec& spec,
                                     double dt, double t_next) {
    detail::SpMat A = detail::lagged_system_matrix(un, spec, dt);
    Eigen::SparseLU<detail::SpMat> lu;
    lu.compute(A);
    StepResult res{GridFunction(un.grid())};
    if (lu.info() != Eigen::Success) {
        res.note = "lagged system singular";
        return res;
    }
    GridFunction rhs = (1.0 / dt) * un;
    if (spec.has_source()) rhs += spec.sample_source(t_next);
    Eigen::Map<const Eigen::VectorXd> b(rhs.values().data(), rhs.size());
    Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite()) {
        res.note = "lagged solve failed";
        return res;
    }
    std::copy(x.data(), x.data() + x.size(), res.u.values().begin());
    res.ok = true;
    return res;
}

/// Fully implicit backward-Euler step: damped Newton on
///   G(u) = u/dt + f(u) - u_n/dt - h(t_{n+1}) = 0.
inline StepResult step_implicit_newton(const GridFunction& un, const ProblemSpec& spec,
                                       double dt, double t_next,
                                       const NewtonParams& np = {}) {
    const Grid& g = un.grid();
    GridFunction rhs = (1.0 / dt) * un;
    if (spec.has_source()) rhs += spec.sample_source(t_next);
    const double scale = 1.0 + l2_norm(rhs);

    auto defect = [&](const GridFunction& u) {
        GridFunction d = apply_spatial_operator(u, spec);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += u[i] / dt - rhs[i];
        return d;
    };

    StepResult res{un};
    GridFunction G = defect(res.u);
    double gnorm = l2_norm(G);
    for (int it = 0; it < np.max_iters; ++it) {
        if (gnorm <= np.tol * scale) {
            res.ok = true;
            res.newton_iters = it;
            return res;
        }
        detail::SpMat J = detail::newton_jacobian(res.u, spec, dt);
        Eigen::SparseLU<detail::SpMat> lu;
        lu.compute(J);
        if (lu.info() != Eigen::Success) {
            res.ok = false;
            res.note = "Jacobian singular";
            return res;
        }
        Eigen::Map<const Eigen::VectorXd> gv(G.values().data(), G.size());
        Eigen::VectorXd step = lu.solve(gv);
        if (!step.allFinite()) {
            res.ok = false;
            res.note = "Newton step not finite";
            return res;
        }

        double lambda = 1.0;
        GridFunction trial(g);
        GridFunction Gt(g);
        double gt_norm = 0.0;
        bool accepted = false;
        for (int back = 0; back < 30; ++back) {
            for (std::size_t i = 0; i < trial.size(); ++i)
                trial[i] = res.u[i] - lambda * step[static_cast<Eigen::Index>(i)];
            Gt = defect(trial);
            gt_norm = l2_norm(Gt);
            if (std::isfinite(gt_norm) && gt_norm < gnorm) {
                accepted = true;
                break;
            }
            lambda *= np.damping;
        }
        if (!accepted) {
            res.ok = false;
            res.newton_iters = it + 1;
            res.note = "line search stalled";
            return res;
        }
        res.u = trial;
        G = Gt;
        gnorm = gt_norm;
        res.newton_iters = it + 1;
    }
    res.ok = gnorm <= np.tol * scale;
    if (!res.ok) res.note = "Newton did not converge";
    return res;
}

}  // namespace pnlab
