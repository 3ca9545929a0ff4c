#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "peakmart/random.hpp"
#include "peakmart/volume_series.hpp"

namespace peakmart {

/// What happens to the detector's memory after an alarm.
enum class ResetPolicy {
    clear_history,   ///< M <- 1 and the reference set is emptied.
    martingale_only, ///< M <- 1, reference set kept.
    none,            ///< nothing; alarms repeat while M stays above the threshold.
};

std::string_view to_string(ResetPolicy policy) noexcept;
/// Throws PreconditionError on an unknown name.
ResetPolicy parse_reset_policy(std::string_view name);

struct DetectorConfig {
    double epsilon = 0.92;
    double lambda_threshold = 20.0;
    /// Reference-set size required before any test is run.
    std::size_t min_history = 5;
    /// Sliding reference-set size; unset means the set grows without bound.
    std::optional<std::size_t> window;
    ResetPolicy reset_policy = ResetPolicy::clear_history;
    std::uint64_t rng_seed = 0;

    /// Throws PreconditionError unless 0 < epsilon < 1, lambda > 1,
    /// min_history >= 2 and window >= min_history.
    void validate() const;
};

struct Observation {
    Count count = 0;
    std::size_t index = 0;
};

struct Alarm {
    std::size_t step = 0;
    double p_value = 0.0;
    double martingale_value = 0.0;

    bool operator==(const Alarm&) const = default;
};

/// Per-step diagnostic record; one per tested observation.
struct StepTrace {
    std::size_t step = 0;
    Count count = 0;
    double strangeness = 0.0;
    double p_value = 0.0;
    double martingale = 0.0;
    bool alarmed = false;

    bool operator==(const StepTrace&) const = default;
};

// ---------------------------------------------------------------------------
// Building blocks
// ---------------------------------------------------------------------------

/// Strangeness of every member of `history` against the mean of the whole
/// history (the newest instance included): D_i = |I_i - mean|.
/// Throws PreconditionError on an empty history.
std::vector<double> strangeness_scores(std::span<const Count> history);

/// Strangeness scaled by n so that it is an exact integer: n * D_i =
/// |n * I_i - sum|. Tie counting uses these values.
std::vector<std::int64_t> scaled_strangeness_scores(std::span<const Count> history);

/// Conformal p-value of the last score against all scores:
/// (#{D_i > D_n} + theta * #{D_i = D_n}) / n. The last element counts itself
/// in the tie set. Throws PreconditionError on empty scores or theta outside
/// [0, 1].
double randomized_p_value(std::span<const double> scores, double theta);

/// Same statistic from precomputed rank counts.
double p_value_from_ranks(std::size_t greater, std::size_t equal, std::size_t n, double theta) noexcept;

/// Power-martingale step: epsilon * p^(epsilon - 1) * m_prev.
/// Throws PreconditionError unless m_prev > 0, 0 < p <= 1, 0 < epsilon < 1.
double martingale_update(double m_prev, double p, double epsilon);

// ---------------------------------------------------------------------------
// Streaming state machine
// ---------------------------------------------------------------------------

/// The test's entire memory. Keeps the reference set twice: in arrival order
/// (for window eviction) and sorted (for logarithmic rank counting).
class DetectorState {
public:
    DetectorState() = default;

    const std::deque<Count>& history() const noexcept { return history_; }
    Count running_sum() const noexcept { return running_sum_; }
    double martingale() const noexcept { return martingale_; }
    /// Number of observations consumed so far (the next expected index).
    std::size_t step() const noexcept { return step_; }

    void push(Count count);
    void evict_oldest();
    void clear_history();
    void reset_martingale() noexcept { martingale_ = 1.0; }
    void set_martingale(double value) noexcept { martingale_ = value; }
    void advance() noexcept { ++step_; }

    struct RankCounts {
        std::size_t greater = 0;
        std::size_t equal = 0;
        std::int64_t scaled_strangeness = 0; ///< n * D_n
    };

    /// Rank counts of `newest` (which must be in the history) against the
    /// current reference set, computed on exact integers.
    RankCounts rank_of(Count newest) const;

private:
    std::deque<Count> history_;
    std::vector<Count> sorted_;
    Count running_sum_ = 0;
    double martingale_ = 1.0;
    std::size_t step_ = 0;
};

struct StepResult {
    std::optional<Alarm> alarm;
    std::optional<StepTrace> trace;
};

/// Source of the per-step randomization theta, uniform on (0, 1].
class ThetaSource {
public:
    explicit ThetaSource(std::uint64_t seed) : random_(seed) {}
    double next() { return random_.uniform_open_closed(); }

private:
    RandomSource random_;
};

/// Consumes one observation. The observation joins the reference set (the
/// oldest member is evicted when a window is full); once the set holds at
/// least min_history counts a test is run, a trace emitted, and an Alarm
/// returned when M reaches lambda, after which the reset policy applies.
/// Throws StreamOrderError when x.index != state.step().
StepResult detector_step(DetectorState& state, const DetectorConfig& config, Observation x, ThetaSource& theta);

/// Convenience owner of state, config and randomness for one stream.
class Detector {
public:
    explicit Detector(DetectorConfig config);

    StepResult push(Count count);
    const DetectorState& state() const noexcept { return state_; }
    const DetectorConfig& config() const noexcept { return config_; }

private:
    DetectorConfig config_;
    DetectorState state_;
    ThetaSource theta_;
};

struct DetectionRun {
    std::vector<Alarm> alarms;
    std::vector<StepTrace> traces;
};

/// Runs a fresh detector seeded with config.rng_seed over the whole series.
DetectionRun run_detector(std::span<const Count> counts, const DetectorConfig& config);
DetectionRun run_detector(const VolumeSeries& series, const DetectorConfig& config);

} // namespace peakmart
