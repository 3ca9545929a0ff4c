#include "peakmart/random.hpp"

#include <cmath>
#include <numbers>

#include "peakmart/errors.hpp"

namespace peakmart {

double RandomSource::uniform01()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomSource::uniform_open_closed()
{
    double u = uniform01();
    while (u == 0.0) {
        u = uniform01();
    }
    return u;
}

std::int64_t RandomSource::uniform_int(std::int64_t lo, std::int64_t hi)
{
    if (hi < lo) {
        throw PreconditionError("uniform_int: hi < lo");
    }
    const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (span == ~std::uint64_t{0}) {
        return static_cast<std::int64_t>(engine_());
    }
    const std::uint64_t range = span + 1;
    // Largest multiple of range that fits; words at or above it are rejected.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % range);
    std::uint64_t word = engine_();
    while (word >= limit) {
        word = engine_();
    }
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + word % range);
}

double RandomSource::standard_normal()
{
    const double u1 = uniform_open_closed();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::int64_t RandomSource::poisson(double mean)
{
    if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw PreconditionError("poisson: mean must be finite and non-negative");
    }
    constexpr double piece = 500.0;
    std::int64_t total = 0;
    while (mean > piece) {
        total += poisson(piece);
        mean -= piece;
    }
    if (mean == 0.0) {
        return total;
    }
    const double u = uniform01();
    double pmf = std::exp(-mean);
    double cdf = pmf;
    std::int64_t k = 0;
    // The k cap guards against u landing in the rounding gap just below 1.
    while (u >= cdf && k < 10000) {
        ++k;
        pmf *= mean / static_cast<double>(k);
        cdf += pmf;
    }
    return total + k;
}

std::uint64_t fnv1a64(std::string_view text) noexcept
{
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_series_seed(std::uint64_t global_seed, std::string_view series_id) noexcept
{
    return splitmix64(global_seed ^ fnv1a64(series_id));
}

} // namespace peakmart
