#pragma once

// Corpora of smooth closed-form test functions with Dirichlet-zero structure:
// sine modes, polynomial bumps x^a (L-x)^b (tensorized in 2D), and seeded
// random trigonometric sums. Entries keep their closed form so the same
// function can be resampled on refined grids.

#include "pnlab/grid.hpp"
#include "pnlab/rng.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace pnlab {

struct CorpusEntry {
    std::string id;
    std::function<double(double, double)> f;  // closed form; y ignored in 1D
};

struct TestCorpus {
    Grid grid;  // base resolution
    std::vector<CorpusEntry> entries;
};

inline GridFunction sample(const CorpusEntry& e, const Grid& g) {
    return GridFunction::sample(g, e.f);
}

namespace corpus {

inline CorpusEntry sine_1d(double L, int k, double amplitude = 1.0) {
    return {"sine-k" + std::to_string(k),
            [=](double x, double) { return amplitude * std::sin(k * M_PI * x / L); }};
}

inline CorpusEntry sine_2d(double lx, double ly, int k, int m, double amplitude = 1.0) {
    return {"sine-k" + std::to_string(k) + "m" + std::to_string(m),
            [=](double x, double y) {
                return amplitude * std::sin(k * M_PI * x / lx) * std::sin(m * M_PI * y / ly);
            }};
}

/// Bump x^a (L-x)^b scaled so the peak value is about `amplitude`.
inline CorpusEntry bump_1d(double L, double a, double b, double amplitude = 1.0) {
    const double xm = L * a / (a + b);
    const double peak = std::pow(xm, a) * std::pow(L - xm, b);
    const double scale = amplitude / peak;
    char id[64];
    std::snprintf(id, sizeof id, "bump-a%g-b%g", a, b);
    return {id, [=](double x, double) {
                return scale * std::pow(x, a) * std::pow(L - x, b);
            }};
}

inline CorpusEntry bump_2d(double lx, double ly, double a, double b, double amplitude = 1.0) {
    CorpusEntry bx = bump_1d(lx, a, b, 1.0);
    CorpusEntry by = bump_1d(ly, b, a, 1.0);
    char id[64];
    std::snprintf(id, sizeof id, "bump2d-a%g-b%g", a, b);
    auto fx = bx.f, fy = by.f;
    return {id, [=](double x, double y) { return amplitude * fx(x, 0) * fy(y, 0); }};
}

/// Random trigonometric sum with 1/k^2-damped coefficients.
inline CorpusEntry random_trig_1d(double L, int max_mode, Rng& rng, int tag) {
    std::vector<double> coef(max_mode);
    for (int k = 0; k < max_mode; ++k)
        coef[k] = rng.uniform(-1.0, 1.0) / ((k + 1) * (k + 1));
    return {"rand-" + std::to_string(tag), [=](double x, double) {
                double s = 0.0;
                for (int k = 0; k < max_mode; ++k)
                    s += coef[k] * std::sin((k + 1) * M_PI * x / L);
                return s;
            }};
}

inline CorpusEntry random_trig_2d(double lx, double ly, int max_mode, Rng& rng, int tag) {
    std::vector<double> coef(static_cast<std::size_t>(max_mode) * max_mode);
    for (auto& c : coef) c = rng.uniform(-1.0, 1.0);
    for (int k = 0; k < max_mode; ++k)
        for (int m = 0; m < max_mode; ++m)
            coef[k * max_mode + m] /= ((k + 1) * (k + 1) + (m + 1) * (m + 1));
    return {"rand2d-" + std::to_string(tag), [=](double x, double y) {
                double s = 0.0;
                for (int k = 0; k < max_mode; ++k)
                    for (int m = 0; m < max_mode; ++m)
                        s += coef[k * max_mode + m] * std::sin((k + 1) * M_PI * x / lx) *
                             std::sin((m + 1) * M_PI * y / ly);
                return s;
            }};
}

}  // namespace corpus

/// Default 1D corpus on (0, L): sines, bumps, seeded random sums.
inline TestCorpus make_corpus_1d(double L, int n_cells, std::uint64_t seed,
                                 int n_random = 5) {
    TestCorpus c{Grid::line(L, n_cells), {}};
    for (int k = 1; k <= 6; ++k) c.entries.push_back(corpus::sine_1d(L, k));
    c.entries.push_back(corpus::sine_1d(L, 1, 2.5));
    c.entries.push_back(corpus::bump_1d(L, 1, 1));
    c.entries.push_back(corpus::bump_1d(L, 2, 2));
    c.entries.push_back(corpus::bump_1d(L, 1, 2));
    c.entries.push_back(corpus::bump_1d(L, 2, 1));
    c.entries.push_back(corpus::bump_1d(L, 3, 2, 1.5));
    Rng rng(seed);
    for (int t = 0; t < n_random; ++t)
        c.entries.push_back(corpus::random_trig_1d(L, 8, rng, t));
    return c;
}

/// Default 2D corpus on (0, lx) x (0, ly).
inline TestCorpus make_corpus_2d(double lx, double ly, int nx, int ny, std::uint64_t seed,
                                 int n_random = 5) {
    TestCorpus c{Grid::rectangle(lx, ly, nx, ny), {}};
    for (auto [k, m] : {std::pair{1, 1}, {1, 2}, {2, 1}, {2, 2}, {3, 1}})
        c.entries.push_back(corpus::sine_2d(lx, ly, k, m));
    c.entries.push_back(corpus::sine_2d(lx, ly, 1, 1, 2.0));
    c.entries.push_back(corpus::bump_2d(lx, ly, 1, 1));
    c.entries.push_back(corpus::bump_2d(lx, ly, 2, 2));
    c.entries.push_back(corpus::bump_2d(lx, ly, 2, 1));
    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
    for (int t = 0; t < n_random; ++t)
        c.entries.push_back(corpus::random_trig_2d(lx, ly, 4, rng, t));
    return c;
}

}  // namespace pnlab
