#include "peakmart/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "peakmart/errors.hpp"

namespace peakmart {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b)
{
    std::int64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) {
        throw PreconditionError("count magnitude overflows exact strangeness arithmetic");
    }
    return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b)
{
    std::int64_t out = 0;
    if (__builtin_add_overflow(a, b, &out)) {
        throw PreconditionError("running sum overflows 64-bit integer");
    }
    return out;
}

// Number of sorted elements equal to value.
std::size_t count_equal(const std::vector<Count>& sorted, Count value)
{
    const auto [lo, hi] = std::equal_range(sorted.begin(), sorted.end(), value);
    return static_cast<std::size_t>(hi - lo);
}

} // namespace

std::string_view to_string(ResetPolicy policy) noexcept
{
    switch (policy) {
    case ResetPolicy::clear_history:
        return "clear_history";
    case ResetPolicy::martingale_only:
        return "martingale_only";
    case ResetPolicy::none:
        return "none";
    }
    return "unknown";
}

ResetPolicy parse_reset_policy(std::string_view name)
{
    if (name == "clear_history") {
        return ResetPolicy::clear_history;
    }
    if (name == "martingale_only") {
        return ResetPolicy::martingale_only;
    }
    if (name == "none") {
        return ResetPolicy::none;
    }
    throw PreconditionError("unknown reset policy '" + std::string(name) + "'");
}

void DetectorConfig::validate() const
{
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw PreconditionError("epsilon must lie in (0, 1)");
    }
    if (!(lambda_threshold > 1.0) || !std::isfinite(lambda_threshold)) {
        throw PreconditionError("lambda threshold must be a finite value > 1");
    }
    if (min_history < 2) {
        throw PreconditionError("min_history must be at least 2");
    }
    if (window && *window < min_history) {
        throw PreconditionError("window must be at least min_history");
    }
}

std::vector<std::int64_t> scaled_strangeness_scores(std::span<const Count> history)
{
    if (history.empty()) {
        throw PreconditionError("strangeness of an empty history");
    }
    const auto n = static_cast<std::int64_t>(history.size());
    std::int64_t sum = 0;
    for (const Count c : history) {
        sum = checked_add(sum, c);
    }
    std::vector<std::int64_t> scaled;
    scaled.reserve(history.size());
    for (const Count c : history) {
        const std::int64_t diff = checked_mul(n, c) - sum;
        scaled.push_back(diff < 0 ? -diff : diff);
    }
    return scaled;
}

std::vector<double> strangeness_scores(std::span<const Count> history)
{
    const auto scaled = scaled_strangeness_scores(history);
    const auto n = static_cast<double>(history.size());
    std::vector<double> scores;
    scores.reserve(scaled.size());
    for (const std::int64_t s : scaled) {
        scores.push_back(static_cast<double>(s) / n);
    }
    return scores;
}

double p_value_from_ranks(std::size_t greater, std::size_t equal, std::size_t n, double theta) noexcept
{
    return (static_cast<double>(greater) + theta * static_cast<double>(equal)) / static_cast<double>(n);
}

double randomized_p_value(std::span<const double> scores, double theta)
{
    if (scores.empty()) {
        throw PreconditionError("p-value of an empty score set");
    }
    if (!(theta >= 0.0 && theta <= 1.0)) {
        throw PreconditionError("theta must lie in [0, 1]");
    }
    const double newest = scores.back();
    std::size_t greater = 0;
    std::size_t equal = 0;
    for (const double d : scores) {
        if (d > newest) {
            ++greater;
        } else if (d == newest) {
            ++equal;
        }
    }
    return p_value_from_ranks(greater, equal, scores.size(), theta);
}

double martingale_update(double m_prev, double p, double epsilon)
{
    if (!(m_prev > 0.0)) {
        throw PreconditionError("martingale must be positive");
    }
    if (!(p > 0.0 && p <= 1.0)) {
        throw PreconditionError("p-value must lie in (0, 1]; p = 0 indicates a theta = 0 draw");
    }
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw PreconditionError("epsilon must lie in (0, 1)");
    }
    return epsilon * std::pow(p, epsilon - 1.0) * m_prev;
}

// ---------------------------------------------------------------------------

void DetectorState::push(Count count)
{
    if (count < 0) {
        throw PreconditionError("negative count");
    }
    running_sum_ = checked_add(running_sum_, count);
    history_.push_back(count);
    sorted_.insert(std::upper_bound(sorted_.begin(), sorted_.end(), count), count);
}

void DetectorState::evict_oldest()
{
    const Count oldest = history_.front();
    history_.pop_front();
    sorted_.erase(std::lower_bound(sorted_.begin(), sorted_.end(), oldest));
    running_sum_ -= oldest;
}

void DetectorState::clear_history()
{
    history_.clear();
    sorted_.clear();
    running_sum_ = 0;
}

DetectorState::RankCounts DetectorState::rank_of(Count newest) const
{
    // With n members and sum S, n * D_i = |n * I_i - S|. A member is stranger
    // than the newest one (scaled strangeness d) iff n * I_i > S + d or
    // n * I_i < S - d, and ties with it iff n * I_i = S +- d.
    const auto n = static_cast<std::int64_t>(sorted_.size());
    const std::int64_t sum = running_sum_;
    const std::int64_t offset = checked_mul(n, newest) - sum;
    const std::int64_t d = offset < 0 ? -offset : offset;

    RankCounts ranks;
    ranks.scaled_strangeness = d;

    const std::int64_t high = checked_add(sum, d); // >= 0
    const Count above = high / n;                  // members > above are stranger
    ranks.greater += static_cast<std::size_t>(
        sorted_.end() - std::upper_bound(sorted_.begin(), sorted_.end(), above));
    if (high % n == 0) {
        ranks.equal += count_equal(sorted_, above);
    }

    const std::int64_t low = sum - d;
    if (low > 0) {
        // members with n * I < low, i.e. I < ceil(low / n)
        const Count below = (low + n - 1) / n;
        ranks.greater += static_cast<std::size_t>(
            std::lower_bound(sorted_.begin(), sorted_.end(), below) - sorted_.begin());
    }
    if (d != 0 && low >= 0 && low % n == 0) {
        ranks.equal += count_equal(sorted_, low / n);
    }
    return ranks;
}

StepResult detector_step(DetectorState& state, const DetectorConfig& config, Observation x, ThetaSource& theta)
{
    if (x.index != state.step()) {
        throw StreamOrderError("observation index " + std::to_string(x.index) + " but detector expects step "
                               + std::to_string(state.step()));
    }
    state.push(x.count);
    if (config.window && state.history().size() > *config.window) {
        state.evict_oldest();
    }
    state.advance();

    StepResult result;
    const std::size_t n = state.history().size();
    if (n < config.min_history) {
        return result;
    }

    const auto ranks = state.rank_of(x.count);
    const double p = p_value_from_ranks(ranks.greater, ranks.equal, n, theta.next());
    const double m = martingale_update(state.martingale(), p, config.epsilon);
    const bool alarmed = m >= config.lambda_threshold;

    result.trace = StepTrace {
        .step = x.index,
        .count = x.count,
        .strangeness = static_cast<double>(ranks.scaled_strangeness) / static_cast<double>(n),
        .p_value = p,
        .martingale = m,
        .alarmed = alarmed,
    };
    state.set_martingale(m);

    if (alarmed) {
        result.alarm = Alarm { .step = x.index, .p_value = p, .martingale_value = m };
        switch (config.reset_policy) {
        case ResetPolicy::clear_history:
            state.clear_history();
            state.reset_martingale();
            break;
        case ResetPolicy::martingale_only:
            state.reset_martingale();
            break;
        case ResetPolicy::none:
            break;
        }
    }
    return result;
}

Detector::Detector(DetectorConfig config)
    : config_(config)
    , theta_(config.rng_seed)
{
    config_.validate();
}

StepResult Detector::push(Count count)
{
    return detector_step(state_, config_, Observation { .count = count, .index = state_.step() }, theta_);
}

DetectionRun run_detector(std::span<const Count> counts, const DetectorConfig& config)
{
    Detector detector(config);
    DetectionRun run;
    for (const Count c : counts) {
        auto step = detector.push(c);
        if (step.trace) {
            run.traces.push_back(*step.trace);
        }
        if (step.alarm) {
            run.alarms.push_back(*step.alarm);
        }
    }
    return run;
}

DetectionRun run_detector(const VolumeSeries& series, const DetectorConfig& config)
{
    return run_detector(std::span<const Count>(series.counts), config);
}

} // namespace peakmart
