#include "peakmart/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "peakmart/errors.hpp"
#include "peakmart/parallel.hpp"
#include "peakmart/random.hpp"

namespace peakmart {

namespace {

bool is_sorted_steps(std::span<const std::size_t> steps)
{
    return std::ranges::is_sorted(steps);
}

std::size_t distance(std::size_t a, std::size_t b)
{
    return a > b ? a - b : b - a;
}

} // namespace

Count peak_prominence(std::span<const Count> counts, std::size_t step)
{
    if (step >= counts.size()) {
        throw PreconditionError("peak step outside series");
    }
    const Count height = counts[step];
    Count left_min = height;
    for (std::size_t i = step; i-- > 0;) {
        if (counts[i] > height) {
            break;
        }
        left_min = std::min(left_min, counts[i]);
    }
    Count right_min = height;
    for (std::size_t i = step + 1; i < counts.size(); ++i) {
        if (counts[i] > height) {
            break;
        }
        right_min = std::min(right_min, counts[i]);
    }
    // A side with no points (series boundary) does not bound the peak.
    if (step == 0 && step + 1 == counts.size()) {
        return 0;
    }
    if (step == 0) {
        return height - right_min;
    }
    if (step + 1 == counts.size()) {
        return height - left_min;
    }
    return height - std::max(left_min, right_min);
}

std::vector<PeakLabel> label_peaks(const VolumeSeries& series, const LabelingParams& params)
{
    if (!(params.min_prominence_fraction > 0.0 && params.min_prominence_fraction <= 1.0)) {
        throw PreconditionError("min_prominence_fraction must lie in (0, 1]");
    }
    if (params.min_separation < 1) {
        throw PreconditionError("min_separation must be at least 1");
    }
    const auto& counts = series.counts;
    if (counts.empty()) {
        return {};
    }
    const Count global_max = *std::ranges::max_element(counts);
    const double threshold = params.min_prominence_fraction * static_cast<double>(global_max);

    std::vector<PeakLabel> candidates;
    const std::size_t n = counts.size();
    std::size_t i = 0;
    while (i < n) {
        // Extend over a plateau of equal values.
        std::size_t end = i;
        while (end + 1 < n && counts[end + 1] == counts[i]) {
            ++end;
        }
        const bool left_ok = i == 0 || counts[i - 1] < counts[i];
        const bool right_ok = end + 1 == n || counts[end + 1] < counts[i];
        if (left_ok && right_ok) {
            const Count prominence = peak_prominence(counts, i);
            if (prominence > 0 && static_cast<double>(prominence) >= threshold) {
                candidates.push_back(PeakLabel { .step = i, .height = counts[i], .prominence = prominence });
            }
        }
        i = end + 1;
    }

    std::ranges::sort(candidates, [](const PeakLabel& a, const PeakLabel& b) {
        if (a.height != b.height) {
            return a.height > b.height;
        }
        return a.step < b.step;
    });
    std::vector<PeakLabel> kept;
    for (const auto& candidate : candidates) {
        const bool crowded = std::ranges::any_of(kept, [&](const PeakLabel& k) {
            return distance(k.step, candidate.step) <= params.min_separation;
        });
        if (!crowded) {
            kept.push_back(candidate);
        }
    }
    std::ranges::sort(kept, {}, &PeakLabel::step);
    return kept;
}

EvalReport match_alarms(std::span<const std::size_t> alarm_steps, std::span<const std::size_t> peak_steps,
    std::size_t tolerance)
{
    if (!is_sorted_steps(alarm_steps) || !is_sorted_steps(peak_steps)) {
        throw PreconditionError("match_alarms needs alarms and peaks sorted by step");
    }
    EvalReport report;
    std::vector<bool> peak_taken(peak_steps.size(), false);
    for (const std::size_t alarm : alarm_steps) {
        std::optional<std::size_t> best;
        for (std::size_t j = 0; j < peak_steps.size(); ++j) {
            if (peak_taken[j] || distance(alarm, peak_steps[j]) > tolerance) {
                continue;
            }
            // Strict comparison keeps the earlier peak on ties.
            if (!best || distance(alarm, peak_steps[j]) < distance(alarm, peak_steps[*best])) {
                best = j;
            }
        }
        if (best) {
            peak_taken[*best] = true;
            report.matches.push_back(PeakMatch { .alarm_step = alarm,
                .peak_step = peak_steps[*best],
                .delay = static_cast<std::int64_t>(alarm) - static_cast<std::int64_t>(peak_steps[*best]) });
        } else {
            report.false_alarms.push_back(alarm);
        }
    }
    for (std::size_t j = 0; j < peak_steps.size(); ++j) {
        if (!peak_taken[j]) {
            report.missed_peaks.push_back(peak_steps[j]);
        }
    }

    const auto matched = static_cast<double>(report.matches.size());
    if (alarm_steps.empty()) {
        report.precision = 1.0;
        report.precision_by_convention = true;
    } else {
        report.precision = matched / static_cast<double>(alarm_steps.size());
    }
    if (peak_steps.empty()) {
        report.recall = 1.0;
        report.recall_by_convention = true;
    } else {
        report.recall = matched / static_cast<double>(peak_steps.size());
    }
    if (!report.matches.empty()) {
        double total = 0.0;
        for (const auto& m : report.matches) {
            total += static_cast<double>(std::abs(m.delay));
        }
        report.mean_abs_delay = total / matched;
    }
    return report;
}

EvalReport match_alarms(std::span<const Alarm> alarms, std::span<const PeakLabel> peaks, std::size_t tolerance)
{
    std::vector<std::size_t> alarm_steps;
    alarm_steps.reserve(alarms.size());
    for (const auto& a : alarms) {
        alarm_steps.push_back(a.step);
    }
    std::vector<std::size_t> peak_steps;
    peak_steps.reserve(peaks.size());
    for (const auto& p : peaks) {
        peak_steps.push_back(p.step);
    }
    return match_alarms(alarm_steps, peak_steps, tolerance);
}

AggregateReport aggregate(std::vector<SeriesEvaluation> per_series)
{
    AggregateReport out;
    double total_delay = 0.0;
    for (const auto& s : per_series) {
        out.alarm_count += s.alarms.size();
        out.peak_count += s.peaks.size();
        out.match_count += s.report.matches.size();
        out.false_alarm_count += s.report.false_alarms.size();
        out.missed_peak_count += s.report.missed_peaks.size();
        for (const auto& m : s.report.matches) {
            out.delays.push_back(m.delay);
            total_delay += static_cast<double>(std::abs(m.delay));
        }
    }
    const auto matched = static_cast<double>(out.match_count);
    out.precision = out.alarm_count == 0 ? 1.0 : matched / static_cast<double>(out.alarm_count);
    out.recall = out.peak_count == 0 ? 1.0 : matched / static_cast<double>(out.peak_count);
    if (out.match_count > 0) {
        out.mean_abs_delay = total_delay / matched;
    }
    out.per_series = std::move(per_series);
    return out;
}

AggregateReport batch_evaluate(std::span<const VolumeSeries> dataset, const DetectorConfig& config,
    const EvaluationParams& params, const GroundTruth* truth)
{
    config.validate();
    std::vector<SeriesEvaluation> results(dataset.size());
    parallel_for(dataset.size(), [&](std::size_t i) {
        const auto& series = dataset[i];
        auto& out = results[i];
        out.series_id = series.id;
        out.rng_seed = derive_series_seed(config.rng_seed, series.id);

        DetectorConfig series_config = config;
        series_config.rng_seed = out.rng_seed;
        out.alarms = run_detector(series, series_config).alarms;

        if (truth) {
            std::vector<std::size_t> steps;
            if (const auto it = truth->find(series.id); it != truth->end()) {
                steps = it->second;
            }
            std::ranges::sort(steps);
            for (const std::size_t step : steps) {
                if (step >= series.counts.size()) {
                    throw PreconditionError("ground-truth peak " + std::to_string(step) + " outside series '"
                                            + series.id + "'");
                }
                out.peaks.push_back(PeakLabel { .step = step,
                    .height = series.counts[step],
                    .prominence = peak_prominence(series.counts, step) });
            }
        } else {
            out.peaks = label_peaks(series, params.labeling);
        }
        out.report = match_alarms(out.alarms, out.peaks, params.tolerance);
    });
    return aggregate(std::move(results));
}

} // namespace peakmart
