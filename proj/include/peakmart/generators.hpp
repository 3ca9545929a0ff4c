#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>

#include "peakmart/volume_series.hpp"

namespace peakmart {

/// Exponential rise into t*, power-law fall after it, on top of a flat
/// baseline, with optional multiplicative log-normal noise.
struct SpikeSpec {
    std::size_t peak_time = 100;
    double peak_height = 1000.0;
    double rise_rate = 0.5;
    double alpha = 1.5;
    double noise_level = 0.0;
    double baseline = 0.0;
    std::size_t horizon = 200;
    std::uint64_t seed = 0;
    std::string id = "spike";

    void validate() const;
};

/// Mean-field susceptible-infected dynamics.
struct SiSpec {
    std::int64_t population = 1'000'000;
    double beta = 0.3;
    std::int64_t initial_infected = 10;
    std::size_t horizon = 100;
    std::string id = "si";

    void validate() const;
};

struct LabeledSeries {
    VolumeSeries series;
    std::size_t true_peak = 0;
};

struct PoissonDistribution {
    double mean = 50.0;
};

struct UniformIntDistribution {
    std::int64_t lo = 0;
    std::int64_t hi = 100;
};

using CountDistribution = std::variant<PoissonDistribution, UniformIntDistribution>;

/// counts[t] = round(peak_height * (t + 1)^-alpha), t = 0..horizon-1.
VolumeSeries gen_powerlaw_decay(double peak_height, double alpha, std::size_t horizon, std::string id = "powerlaw");

/// New infections per step of I' = I + beta * I * (N - I) / N, rounded.
/// true_peak is the argmax of the unrounded increments (earliest on ties).
LabeledSeries gen_si(const SiSpec& spec);

/// true_peak is spec.peak_time regardless of noise.
LabeledSeries gen_spike(const SpikeSpec& spec);

/// i.i.d. draws; exchangeable by construction.
VolumeSeries gen_exchangeable(const CountDistribution& distribution, std::size_t horizon, std::uint64_t seed,
    std::string id = "exchangeable");

} // namespace peakmart
