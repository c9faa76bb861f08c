#pragma once

// Seeded random helpers with a fixed bit-to-double mapping, so identical
// seeds reproduce identical streams across platforms and standard libraries.

#include <cstdint>
#include <random>

namespace pnlab {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace pnlab
