// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "mmce/types.hpp"

namespace mmce {

/// Deterministic random stream. The draw functions are implemented on top of
/// the raw mt19937_64 output so that a fixed seed reproduces bit-identical
/// sequences independent of the standard library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Derive an independent child stream (used for per-trial seeding).
    static Rng child(std::uint64_t base_seed, std::uint64_t a, std::uint64_t b = 0) {
        std::seed_seq seq{base_seed, a, b};
        std::uint64_t s[2];
        seq.generate(s, s + 2);
        return Rng((static_cast<std::uint64_t>(s[0]) << 32) ^ s[1]);
    }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (cosine branch).
    double gauss() {
        double u1 = 1.0 - uniform(); // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
    Complex cgauss(double variance = 1.0) {
        double u1 = 1.0 - uniform();
        double u2 = uniform();
        double r = std::sqrt(-variance * std::log(u1));
        return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
    }

private:
    std::mt19937_64 gen_;
};

} // namespace mmce
