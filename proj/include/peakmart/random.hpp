#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace peakmart {

/// Seeded random source with a platform-stable output sequence.
///
/// The engine is std::mt19937_64, whose output is fixed by the standard.
/// The standard distributions are not, so every variate below is derived
/// from raw engine words with the algorithm documented on each member.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Top 53 bits scaled to [0, 1).
    double uniform01();

    /// Uniform on (0, 1): uniform01() redrawn while it is exactly zero.
    double uniform_open_closed();

    /// Uniform integer in [lo, hi] by rejection on the full 64-bit word.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Standard normal via the Box-Muller transform (cosine branch only).
    double standard_normal();

    /// Poisson draw by sequential inversion of the CDF. Means above 500 are
    /// split into independent pieces to keep exp(-mean) representable.
    std::int64_t poisson(double mean);

private:
    std::mt19937_64 engine_;
};

/// 64-bit FNV-1a over the bytes of `text`.
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// The SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Per-series seed: splitmix64(global_seed ^ fnv1a64(series_id)).
std::uint64_t derive_series_seed(std::uint64_t global_seed, std::string_view series_id) noexcept;

} // namespace peakmart
