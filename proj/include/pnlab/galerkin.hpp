#pragma once

// Spectral Galerkin route: expand u(t) in the first m discrete Dirichlet
// eigenmodes (sine modes, which the 3/5-point Laplacian reproduces exactly)
// and close each backward-Euler step with the test functions -lap x^k =
// lambda_k x^k. The nonlinear m-dimensional system is solved by damped
// Newton with a finite-difference Jacobian.

#include "pnlab/problem.hpp"
#include "pnlab/solver_config.hpp"
#include "pnlab/steppers.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace pnlab {

struct GalerkinBasis {
    Grid grid;
    std::vector<GridFunction> modes;   // orthonormal in the quadrature L2 product
    std::vector<double> lambda_h;      // discrete eigenvalues of -lap_h

    int m() const { return static_cast<int>(modes.size()); }

    GridFunction expand(const Eigen::VectorXd& c) const {
        GridFunction u(grid);
        for (int k = 0; k < m(); ++k)
            for (std::size_t i = 0; i < u.size(); ++i) u[i] += c[k] * modes[k][i];
        return u;
    }

    Eigen::VectorXd project(const GridFunction& u) const {
        Eigen::VectorXd c(m());
        for (int k = 0; k < m(); ++k) c[k] = inner(u, modes[k]);
        return c;
    }
};

/// Discrete eigenvalue of mode k (1-based) of -d^2/dx^2 on axis `axis`.
inline double discrete_mode_eigenvalue(const Grid& g, int axis, int k) {
    const double h = g.spacing(axis);
    const double s = std::sin(0.5 * k * M_PI * h / g.extent(axis));
    return 4.0 / (h * h) * s * s;
}

/// First m sine modes (products of axis modes in 2D), sorted by discrete
/// eigenvalue and normalized in the quadrature L2 norm.
inline GalerkinBasis make_sine_basis(const Grid& grid, int m) {
    if (m < 1) throw std::invalid_argument("make_sine_basis: need m >= 1");
    struct ModeId { int kx, ky; double lambda; };
    std::vector<ModeId> ids;
    if (grid.dim() == 1) {
        if (m > grid.n_cells(0))
            throw std::invalid_argument("make_sine_basis: more modes than resolvable");
        for (int k = 1; k <= m; ++k) ids.push_back({k, 0, discrete_mode_eigenvalue(grid, 0, k)});
    } else {
        const int cap = std::min(grid.n_cells(0), grid.n_cells(1));
        if (m > cap * cap)
            throw std::invalid_argument("make_sine_basis: more modes than resolvable");
        for (int kx = 1; kx <= cap; ++kx)
            for (int ky = 1; ky <= cap; ++ky)
                ids.push_back({kx, ky, discrete_mode_eigenvalue(grid, 0, kx) +
                                            discrete_mode_eigenvalue(grid, 1, ky)});
        std::stable_sort(ids.begin(), ids.end(),
                         [](const ModeId& a, const ModeId& b) { return a.lambda < b.lambda; });
        ids.resize(m);
    }

    GalerkinBasis basis{grid, {}, {}};
    for (const auto& id : ids) {
        GridFunction v = GridFunction::sample(grid, [&](double x, double y) {
            double s = std::sin(id.kx * M_PI * x / grid.extent(0));
            if (grid.dim() == 2) s *= std::sin(id.ky * M_PI * y / grid.extent(1));
            return s;
        });
        v *= 1.0 / l2_norm(v);
        basis.modes.push_back(std::move(v));
        basis.lambda_h.push_back(id.lambda);
    }
    return basis;
}

/// One backward-Euler step in mode space:
///   <u_{n+1}/dt + f(u_{n+1}) - u_n/dt - h(t_{n+1}), lambda_k x^k> = 0.
inline StepResult step_galerkin(const GalerkinBasis& basis, const GridFunction& un,
                                const ProblemSpec& spec, double dt, double t_next,
                                const NewtonParams& np = {}) {
    const int m = basis.m();
    GridFunction drift = (1.0 / dt) * un;
    if (spec.has_source()) drift += spec.sample_source(t_next);

    auto system = [&](const Eigen::VectorXd& c) {
        GridFunction u = basis.expand(c);
        GridFunction g = apply_spatial_operator(u, spec);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += u[i] / dt - drift[i];
        Eigen::VectorXd F(m);
        for (int k = 0; k < m; ++k) F[k] = basis.lambda_h[k] * inner(g, basis.modes[k]);
        return F;
    };

    const double scale = 1.0 + l2_norm(drift);
    Eigen::VectorXd c = basis.project(un);
    Eigen::VectorXd F = system(c);
    StepResult res{un};
    for (int it = 0; it < np.max_iters; ++it) {
        if (F.norm() <= np.tol * scale) {
            res.u = basis.expand(c);
            res.ok = true;
            res.newton_iters = it;
            return res;
        }
        Eigen::MatrixXd J(m, m);
        for (int j = 0; j < m; ++j) {
            const double eps = 1e-7 * (1.0 + std::abs(c[j]));
            Eigen::VectorXd cp = c;
            cp[j] += eps;
            J.col(j) = (system(cp) - F) / eps;
        }
        Eigen::VectorXd step = J.partialPivLu().solve(F);
        if (!step.allFinite()) {
            res.note = "Galerkin Newton step not finite";
            return res;
        }
        double lambda = 1.0;
        bool accepted = false;
        Eigen::VectorXd ct, Ft;
        for (int back = 0; back < 30; ++back) {
            ct = c - lambda * step;
            Ft = system(ct);
            if (Ft.allFinite() && Ft.norm() < F.norm()) {
                accepted = true;
                break;
            }
            lambda *= np.damping;
        }
        if (!accepted) {
            res.note = "Galerkin line search stalled";
            res.newton_iters = it + 1;
            return res;
        }
        c = ct;
        F = Ft;
        res.newton_iters = it + 1;
    }
    res.ok = F.norm() <= np.tol * scale;
    if (res.ok) res.u = basis.expand(c);
    else res.note = "Galerkin Newton did not converge";
    return res;
}

}  // namespace pnlab
