// SPDX-License-Identifier: Apache-2.0
//
// Deterministic random streams.
//
// Every stochastic component draws from its own RngStream. The engine is
// std::mt19937_64, whose output sequence is fixed by the C++ standard. The
// distribution transforms below are written out by hand because the standard
// library distributions are implementation-defined; this keeps traces
// bit-identical across compilers and platforms.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>

namespace mmw {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed for an independent sub-stream, e.g. derive_seed(master, StreamKind::Shadowing, gnb).
enum class StreamKind : std::uint64_t {
    Shadowing = 1,
    Clusters = 2,
    Phases = 3,
    Synthetic = 4,
    Noise = 5,
    Scatterers = 6,
};

inline constexpr std::uint64_t derive_seed(std::uint64_t master, StreamKind kind,
                                           std::uint64_t index = 0) noexcept
{
    return splitmix64(splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(kind))) + index);
}

class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer on [lo, hi], rejection-sampled to avoid modulo bias.
    int uniform_int(int lo, int hi)
    {
        if (hi < lo)
            throw std::invalid_argument("uniform_int: empty range");
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return lo + static_cast<int>(x % span);
    }

    // Standard normal via Box-Muller; the second variate is cached.
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    double exponential(double scale) { return -scale * std::log1p(-uniform()); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace mmw
