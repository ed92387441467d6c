#pragma once

#include <cstdint>
#include <cmath>

#include "fsasense/common.hpp"

namespace fsasense {

/**
 * Seeded PRNG for deterministic trace synthesis (splitmix64 core).
 *
 * Hand-rolled so that traces are bit-identical across compilers and
 * standard libraries; std::normal_distribution makes no such promise.
 * Substreams derived with mix() are independent enough for Monte Carlo
 * use and allow per-packet generators, which keeps parallel synthesis
 * deterministic regardless of thread schedule.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // decorrelate trivially related seeds (0, 1, 2, ...)
        next_u64();
        next_u64();
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [a, b).
    double uniform(double a, double b) { return a + uniform() * (b - a); }

    /// Standard normal sample (Box-Muller, no cached spare).
    double gaussian() {
        double u1 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    /// Circular complex Gaussian with E|z|^2 = sigma^2.
    cplx circular_gaussian(double sigma) {
        double u1 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        double u2 = uniform();
        double r = sigma * std::sqrt(-std::log(u1));
        return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
    }

    /// Derive a substream seed from (seed, index), e.g. one stream per packet.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ull + (index << 1));
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

} // namespace fsasense
