#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "peakmart/martingale.hpp"
#include "peakmart/volume_series.hpp"

namespace peakmart {

struct PeakLabel {
    std::size_t step = 0;
    Count height = 0;
    /// Height above the higher of the two lowest points separating the peak
    /// from the nearest strictly higher point on each side (or the series
    /// end when there is none). An empty side at the boundary is ignored.
    Count prominence = 0;

    bool operator==(const PeakLabel&) const = default;
};

struct PeakMatch {
    std::size_t alarm_step = 0;
    std::size_t peak_step = 0;
    /// alarm - peak; negative when the alarm fired on the rise.
    std::int64_t delay = 0;

    bool operator==(const PeakMatch&) const = default;
};

struct EvalReport {
    std::vector<PeakMatch> matches;
    std::vector<std::size_t> false_alarms;
    std::vector<std::size_t> missed_peaks;
    double precision = 1.0;
    double recall = 1.0;
    /// Unset when there are no matches.
    std::optional<double> mean_abs_delay;
    /// Precision is 1 by convention because there were no alarms.
    bool precision_by_convention = false;
    /// Recall is 1 by convention because there were no peaks.
    bool recall_by_convention = false;
};

struct LabelingParams {
    double min_prominence_fraction = 0.3;
    std::size_t min_separation = 10;
};

struct EvaluationParams {
    LabelingParams labeling;
    std::size_t tolerance = 5;
};

/// Prominence of the point at `step`, which must be a local maximum.
Count peak_prominence(std::span<const Count> counts, std::size_t step);

/// Prominent local maxima, sorted by step. A plateau contributes its first
/// step. Candidates need prominence > 0 and >= fraction * global max; they
/// are then kept greedily from the highest (ties: smaller step), dropping
/// any candidate within min_separation steps of one already kept.
std::vector<PeakLabel> label_peaks(const VolumeSeries& series, const LabelingParams& params = {});

/// Greedy one-to-one matching in alarm order: each alarm takes the nearest
/// unmatched peak within tolerance (ties: earlier peak). Throws
/// PreconditionError if either input is not sorted by step.
EvalReport match_alarms(std::span<const std::size_t> alarm_steps, std::span<const std::size_t> peak_steps,
    std::size_t tolerance);
EvalReport match_alarms(std::span<const Alarm> alarms, std::span<const PeakLabel> peaks, std::size_t tolerance);

/// Known peak steps per series id, e.g. from a generator sidecar.
using GroundTruth = std::map<std::string, std::vector<std::size_t>>;

struct SeriesEvaluation {
    std::string series_id;
    std::uint64_t rng_seed = 0;
    std::vector<Alarm> alarms;
    std::vector<PeakLabel> peaks;
    EvalReport report;
};

struct AggregateReport {
    std::size_t alarm_count = 0;
    std::size_t peak_count = 0;
    std::size_t match_count = 0;
    std::size_t false_alarm_count = 0;
    std::size_t missed_peak_count = 0;
    double precision = 1.0;
    double recall = 1.0;
    std::optional<double> mean_abs_delay;
    std::vector<std::int64_t> delays;
    std::vector<SeriesEvaluation> per_series;
};

/// Runs the detector on every series with rng_seed derived from
/// (config.rng_seed, series id), labels or looks up peaks, matches, and
/// micro-averages. Series are processed in parallel; per_series keeps input
/// order. With `truth`, a series absent from it has no peaks.
AggregateReport batch_evaluate(std::span<const VolumeSeries> dataset, const DetectorConfig& config,
    const EvaluationParams& params, const GroundTruth* truth = nullptr);

/// Micro-averaged fold over per-series results.
AggregateReport aggregate(std::vector<SeriesEvaluation> per_series);

} // namespace peakmart
