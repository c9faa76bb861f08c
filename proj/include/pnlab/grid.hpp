#pragma once

// Uniform rectangular grids with homogeneous Dirichlet boundaries and the
// discrete calculus built on them: central-difference gradient/Laplacian,
// nodal quadrature, and the first Dirichlet eigenpair.
//
// Fields store interior nodal values only; the boundary value 0 enters every
// operator through ghost nodes. All operations are pure: inputs are never
// mutated, results are returned by value.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnlab {

class Grid {
public:
    static Grid line(double length, int n_cells) {
        return Grid(1, {length, 0.0}, {n_cells, 1});
    }

    static Grid rectangle(double lx, double ly, int nx, int ny) {
        return Grid(2, {lx, ly}, {nx, ny});
    }

    int dim() const { return dim_; }
    double extent(int axis) const { return extents_[axis]; }
    int n_cells(int axis) const { return n_[axis]; }
    double spacing(int axis) const { return spacing_[axis]; }

    /// Total number of interior nodes.
    std::size_t size() const {
        return static_cast<std::size_t>(n_[0]) * static_cast<std::size_t>(n_[1]);
    }

    /// Quadrature weight of one interior node (full cell volume).
    double cell_volume() const {
        return dim_ == 1 ? spacing_[0] : spacing_[0] * spacing_[1];
    }

    std::size_t index(int ix, int iy = 0) const {
        return static_cast<std::size_t>(iy) * n_[0] + ix;
    }

    double coord_x(int ix) const { return (ix + 1) * spacing_[0]; }
    double coord_y(int iy) const { return dim_ == 2 ? (iy + 1) * spacing_[1] : 0.0; }

    /// First Dirichlet eigenvalue of -Laplace on the continuum domain.
    double lambda1_continuum() const {
        double s = 1.0 / (extents_[0] * extents_[0]);
        if (dim_ == 2) s += 1.0 / (extents_[1] * extents_[1]);
        return M_PI * M_PI * s;
    }

    bool operator==(const Grid& o) const {
        return dim_ == o.dim_ && extents_ == o.extents_ && n_ == o.n_;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }

    /// Same domain with n_cells scaled by an integer factor on every axis.
    Grid refined(int factor) const {
        if (dim_ == 1) return line(extents_[0], n_[0] * factor);
        return rectangle(extents_[0], extents_[1], n_[0] * factor, n_[1] * factor);
    }

private:
    Grid(int dim, std::array<double, 2> extents, std::array<int, 2> n)
        : dim_(dim), extents_(extents), n_(n) {
        for (int a = 0; a < dim_; ++a) {
            if (extents_[a] <= 0.0)
                throw std::invalid_argument("Grid: extent must be positive");
            if (n_[a] < 3)
                throw std::invalid_argument("Grid: need at least 3 interior nodes per axis");
            spacing_[a] = extents_[a] / (n_[a] + 1);
        }
        if (dim_ == 1) {
            n_[1] = 1;
            spacing_[1] = 0.0;
        }
    }

    int dim_;
    std::array<double, 2> extents_;
    std::array<int, 2> n_;
    std::array<double, 2> spacing_{0.0, 0.0};
};

/// Interior nodal values of a scalar field; boundary values are implicitly 0.
class GridFunction {
public:
    explicit GridFunction(const Grid& grid)
        : grid_(grid), values_(grid.size(), 0.0) {}

    GridFunction(const Grid& grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw std::invalid_argument("GridFunction: value count does not match grid");
        for (double v : values_)
            if (!std::isfinite(v))
                throw std::invalid_argument("GridFunction: non-finite nodal value");
    }

    /// Sample a closed form f(x, y) at the interior nodes (f(x, 0) in 1D).
    template <class F>
    static GridFunction sample(const Grid& grid, F&& f) {
        GridFunction u(grid);
        for (int iy = 0; iy < grid.n_cells(1); ++iy)
            for (int ix = 0; ix < grid.n_cells(0); ++ix)
                u[grid.index(ix, iy)] = f(grid.coord_x(ix), grid.coord_y(iy));
        return u;
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    GridFunction& operator+=(const GridFunction& o) {
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    GridFunction& operator-=(const GridFunction& o) {
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    GridFunction& operator*=(double a) {
        for (double& v : values_) v *= a;
        return *this;
    }

    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(double s, GridFunction a) { return a *= s; }

private:
    Grid grid_;
    std::vector<double> values_;
};

namespace detail {

inline void require_same_grid(const GridFunction& a, const GridFunction& b) {
    if (a.grid() != b.grid())
        throw std::invalid_argument("grid mismatch between fields");
}

/// Value at (ix, iy) with Dirichlet-zero ghosts outside the interior range.
inline double at_or_zero(const GridFunction& u, int ix, int iy) {
    const Grid& g = u.grid();
    if (ix < 0 || ix >= g.n_cells(0) || iy < 0 || iy >= g.n_cells(1)) return 0.0;
    return u[g.index(ix, iy)];
}

}  // namespace detail

/// Second-order central-difference Laplacian with Dirichlet-zero ghosts.
inline GridFunction laplacian(const GridFunction& u) {
    const Grid& g = u.grid();
    GridFunction out(g);
    const double ihx2 = 1.0 / (g.spacing(0) * g.spacing(0));
    const double ihy2 = g.dim() == 2 ? 1.0 / (g.spacing(1) * g.spacing(1)) : 0.0;
    for (int iy = 0; iy < g.n_cells(1); ++iy)
        for (int ix = 0; ix < g.n_cells(0); ++ix) {
            const double c = u[g.index(ix, iy)];
            double v = (detail::at_or_zero(u, ix - 1, iy) - 2.0 * c +
                        detail::at_or_zero(u, ix + 1, iy)) * ihx2;
            if (g.dim() == 2)
                v += (detail::at_or_zero(u, ix, iy - 1) - 2.0 * c +
                      detail::at_or_zero(u, ix, iy + 1)) * ihy2;
            out[g.index(ix, iy)] = v;
        }
    return out;
}

/// Pure second difference along one axis (the Laplacian is their sum).
inline GridFunction second_difference(const GridFunction& u, int axis) {
    const Grid& g = u.grid();
    if (axis < 0 || axis >= g.dim())
        throw std::invalid_argument("second_difference: axis out of range");
    GridFunction out(g);
    const double ih2 = 1.0 / (g.spacing(axis) * g.spacing(axis));
    const int dx = axis == 0 ? 1 : 0;
    const int dy = axis == 1 ? 1 : 0;
    for (int iy = 0; iy < g.n_cells(1); ++iy)
        for (int ix = 0; ix < g.n_cells(0); ++ix)
            out[g.index(ix, iy)] =
                (detail::at_or_zero(u, ix - dx, iy - dy) - 2.0 * u[g.index(ix, iy)] +
                 detail::at_or_zero(u, ix + dx, iy + dy)) * ih2;
    return out;
}

/// Central-difference gradient, one component per axis. Near-boundary
/// stencils pick up the Dirichlet value 0 through the ghost nodes.
inline std::vector<GridFunction> gradient(const GridFunction& u) {
    const Grid& g = u.grid();
    std::vector<GridFunction> comps;
    comps.reserve(g.dim());
    for (int axis = 0; axis < g.dim(); ++axis) {
        GridFunction c(g);
        const double ih2 = 1.0 / (2.0 * g.spacing(axis));
        const int dx = axis == 0 ? 1 : 0;
        const int dy = axis == 1 ? 1 : 0;
        for (int iy = 0; iy < g.n_cells(1); ++iy)
            for (int ix = 0; ix < g.n_cells(0); ++ix)
                c[g.index(ix, iy)] =
                    (detail::at_or_zero(u, ix + dx, iy + dy) -
                     detail::at_or_zero(u, ix - dx, iy - dy)) * ih2;
        comps.push_back(std::move(c));
    }
    return comps;
}

/// Central-difference divergence of a vector field (one component per axis).
inline GridFunction divergence(const std::vector<GridFunction>& field) {
    if (field.empty()) throw std::invalid_argument("divergence: empty field");
    const Grid& g = field[0].grid();
    if (static_cast<int>(field.size()) != g.dim())
        throw std::invalid_argument("divergence: component count does not match grid dim");
    GridFunction out(g);
    for (int axis = 0; axis < g.dim(); ++axis) {
        const GridFunction& c = field[axis];
        const double ih2 = 1.0 / (2.0 * g.spacing(axis));
        const int dx = axis == 0 ? 1 : 0;
        const int dy = axis == 1 ? 1 : 0;
        for (int iy = 0; iy < g.n_cells(1); ++iy)
            for (int ix = 0; ix < g.n_cells(0); ++ix)
                out[g.index(ix, iy)] +=
                    (detail::at_or_zero(c, ix + dx, iy + dy) -
                     detail::at_or_zero(c, ix - dx, iy - dy)) * ih2;
    }
    return out;
}

/// Euclidean magnitude of the gradient per node.
inline GridFunction gradient_magnitude(const GridFunction& u) {
    auto comps = gradient(u);
    GridFunction out(u.grid());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0.0;
        for (const auto& c : comps) s += c[i] * c[i];
        out[i] = std::sqrt(s);
    }
    return out;
}

/// Nodal quadrature: full cell weight per interior node, boundary treated
/// as 0. Exact for the piecewise-linear extension of interior constants and
/// makes the 3/5-point Laplacian self-adjoint in the induced inner product.
inline double integrate(const GridFunction& w) {
    double s = 0.0;
    for (double v : w.values()) s += v;
    return s * w.grid().cell_volume();
}

/// Quadrature of a nodewise expression, avoiding the temporary field.
template <class F>
double integrate_nodes(const GridFunction& u, F&& node_value) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += node_value(i);
    return s * u.grid().cell_volume();
}

inline double inner(const GridFunction& a, const GridFunction& b) {
    detail::require_same_grid(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * a.grid().cell_volume();
}

inline double l2_norm(const GridFunction& a) { return std::sqrt(inner(a, a)); }

/// Sparse matrix of -Laplace_h over interior nodes (symmetric positive
/// definite with the Dirichlet-zero ghosts).
inline Eigen::SparseMatrix<double> neg_laplacian_matrix(const Grid& g) {
    const int nx = g.n_cells(0), ny = g.n_cells(1);
    const double ihx2 = 1.0 / (g.spacing(0) * g.spacing(0));
    const double ihy2 = g.dim() == 2 ? 1.0 / (g.spacing(1) * g.spacing(1)) : 0.0;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(g.size() * 5);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const auto row = static_cast<int>(g.index(ix, iy));
            double diag = 2.0 * ihx2 + (g.dim() == 2 ? 2.0 * ihy2 : 0.0);
            trip.emplace_back(row, row, diag);
            if (ix > 0) trip.emplace_back(row, row - 1, -ihx2);
            if (ix < nx - 1) trip.emplace_back(row, row + 1, -ihx2);
            if (g.dim() == 2 && iy > 0) trip.emplace_back(row, row - nx, -ihy2);
            if (g.dim() == 2 && iy < ny - 1) trip.emplace_back(row, row + nx, -ihy2);
        }
    Eigen::SparseMatrix<double> A(static_cast<int>(g.size()), static_cast<int>(g.size()));
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

struct EigenPair {
    double lambda_discrete = 0.0;
    double lambda_continuum = 0.0;
    GridFunction v1;
};

/// First Dirichlet eigenpair of -Laplace_h by inverse power iteration.
/// v1 is normalized to 1 in the quadrature L2 norm and strictly positive.
/// Iterates until the relative eigen-residual reaches `residual_tol` or
/// stalls at its roundoff floor; a floor above the 1e-10 certificate is an
/// error.
inline EigenPair first_eigenpair(const Grid& grid, double residual_tol = 1e-11,
                                 int max_iters = 500) {
    constexpr double kResidualCertificate = 1e-10;
    Eigen::SparseMatrix<double> A = neg_laplacian_matrix(grid);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(A);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("first_eigenpair: factorization of -Laplace_h failed");

    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    v.normalize();
    Eigen::VectorXd best_v = v;
    double best_res = std::numeric_limits<double>::infinity();
    double best_lambda = 0.0;
    int stalled = 0;
    for (int it = 0; it < max_iters; ++it) {
        Eigen::VectorXd z = solver.solve(v);
        z.normalize();
        Eigen::VectorXd Az = A * z;
        const double lambda = z.dot(Az);
        const double res = (Az - lambda * z).norm() / lambda;
        v = z;
        if (res < best_res) {
            stalled = res > 0.5 * best_res ? stalled + 1 : 0;
            best_res = res;
            best_lambda = lambda;
            best_v = z;
        } else {
            ++stalled;
        }
        if (best_res <= residual_tol || stalled >= 8) break;
    }
    if (best_res > kResidualCertificate)
        throw std::runtime_error(
            "first_eigenpair: inverse iteration stalled at relative residual " +
            std::to_string(best_res));

    GridFunction v1(grid, std::vector<double>(best_v.data(), best_v.data() + n));
    if (integrate(v1) < 0.0) v1 *= -1.0;
    v1 *= 1.0 / l2_norm(v1);
    for (double val : v1.values())
        if (val <= 0.0)
            throw std::runtime_error("first_eigenpair: eigenfunction not strictly positive");
    return EigenPair{best_lambda, grid.lambda1_continuum(), std::move(v1)};
}

}  // namespace pnlab
