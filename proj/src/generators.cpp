#include "peakmart/generators.hpp"

#include <cmath>

#include "peakmart/errors.hpp"
#include "peakmart/random.hpp"

namespace peakmart {

namespace {

Count round_count(double value)
{
    if (!std::isfinite(value) || value <= 0.0) {
        return 0;
    }
    return static_cast<Count>(std::llround(value));
}

void require(bool condition, const char* message)
{
    if (!condition) {
        throw PreconditionError(message);
    }
}

} // namespace

void SpikeSpec::validate() const
{
    require(peak_time > 0 && peak_time < horizon, "spike: need 0 < peak_time < horizon");
    require(peak_height > 0.0 && std::isfinite(peak_height), "spike: peak_height must be positive");
    require(rise_rate > 0.0 && std::isfinite(rise_rate), "spike: rise_rate must be positive");
    require(alpha > 0.0 && std::isfinite(alpha), "spike: alpha must be positive");
    require(noise_level >= 0.0 && std::isfinite(noise_level), "spike: noise_level must be non-negative");
    require(baseline >= 0.0 && std::isfinite(baseline), "spike: baseline must be non-negative");
    require(is_valid_series_id(id), "spike: invalid series id");
}

void SiSpec::validate() const
{
    require(population >= 1, "si: population must be positive");
    require(beta >= 0.0 && beta <= 1.0, "si: beta must lie in [0, 1]");
    require(initial_infected >= 1 && initial_infected <= population, "si: need 1 <= initial_infected <= population");
    require(horizon >= 1, "si: horizon must be at least 1");
    require(is_valid_series_id(id), "si: invalid series id");
}

VolumeSeries gen_powerlaw_decay(double peak_height, double alpha, std::size_t horizon, std::string id)
{
    require(horizon >= 1, "powerlaw: horizon must be at least 1");
    require(peak_height > 0.0 && std::isfinite(peak_height), "powerlaw: peak_height must be positive");
    require(alpha > 0.0 && std::isfinite(alpha), "powerlaw: alpha must be positive");
    VolumeSeries series { .id = std::move(id), .counts = {}, .step_label = {} };
    series.counts.reserve(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
        series.counts.push_back(round_count(peak_height * std::pow(static_cast<double>(t + 1), -alpha)));
    }
    validate(series);
    return series;
}

LabeledSeries gen_si(const SiSpec& spec)
{
    spec.validate();
    const auto population = static_cast<double>(spec.population);
    double infected = static_cast<double>(spec.initial_infected);

    LabeledSeries out;
    out.series.id = spec.id;
    out.series.counts.reserve(spec.horizon);
    double best = -1.0;
    for (std::size_t t = 0; t < spec.horizon; ++t) {
        const double delta = spec.beta * infected * (population - infected) / population;
        infected += delta;
        out.series.counts.push_back(round_count(delta));
        if (delta > best) {
            best = delta;
            out.true_peak = t;
        }
    }
    return out;
}

LabeledSeries gen_spike(const SpikeSpec& spec)
{
    spec.validate();
    RandomSource random(spec.seed);

    LabeledSeries out;
    out.series.id = spec.id;
    out.series.counts.reserve(spec.horizon);
    out.true_peak = spec.peak_time;
    const auto peak = static_cast<double>(spec.peak_time);
    for (std::size_t t = 0; t < spec.horizon; ++t) {
        const auto time = static_cast<double>(t);
        const double shape = t <= spec.peak_time
            ? spec.peak_height * std::exp(spec.rise_rate * (time - peak))
            : spec.peak_height * std::pow(time - peak + 1.0, -spec.alpha);
        double value = spec.baseline + shape;
        if (spec.noise_level > 0.0) {
            value *= std::exp(spec.noise_level * random.standard_normal());
        }
        out.series.counts.push_back(round_count(value));
    }
    return out;
}

VolumeSeries gen_exchangeable(const CountDistribution& distribution, std::size_t horizon, std::uint64_t seed,
    std::string id)
{
    require(horizon >= 1, "exchangeable: horizon must be at least 1");
    require(is_valid_series_id(id), "exchangeable: invalid series id");
    RandomSource random(seed);
    VolumeSeries series { .id = std::move(id), .counts = {}, .step_label = {} };
    series.counts.reserve(horizon);
    std::visit(
        [&](const auto& dist) {
            using T = std::decay_t<decltype(dist)>;
            if constexpr (std::is_same_v<T, PoissonDistribution>) {
                require(dist.mean >= 0.0 && std::isfinite(dist.mean), "poisson: mean must be non-negative");
                for (std::size_t t = 0; t < horizon; ++t) {
                    series.counts.push_back(random.poisson(dist.mean));
                }
            } else {
                require(0 <= dist.lo && dist.lo <= dist.hi, "uniform_int: need 0 <= lo <= hi");
                for (std::size_t t = 0; t < horizon; ++t) {
                    series.counts.push_back(random.uniform_int(dist.lo, dist.hi));
                }
            }
        },
        distribution);
    return series;
}

} // namespace peakmart
