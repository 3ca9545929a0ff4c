#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "peakmart/evaluation.hpp"
#include "peakmart/martingale.hpp"

namespace peakmart {

/// A trace row tagged with its series.
struct TraceRecord {
    std::string series_id;
    StepTrace trace;

    bool operator==(const TraceRecord&) const = default;
};

/// An alarm tagged with its series.
struct AlarmRecord {
    std::string series_id;
    Alarm alarm;

    bool operator==(const AlarmRecord&) const = default;
};

inline constexpr std::string_view trace_csv_header = "series_id,step,count,strangeness,p_value,martingale,alarmed";

/// Shortest decimal text that reads back to the same double.
std::string format_real(double value);

/// Quotes a CSV field when it contains a comma, quote or leading/trailing space.
std::string csv_field(std::string_view text);
/// Splits one CSV line, honouring double-quoted fields.
std::vector<std::string> split_csv_line(std::string_view line);

void write_trace_header(std::ostream& out);
void write_trace_rows(std::ostream& out, std::string_view series_id, std::span<const StepTrace> traces);
/// Throws ParseError on a bad header or row.
std::vector<TraceRecord> read_trace_csv(std::istream& in);

/// One `series_id,step,p_value,martingale` line per alarm, no header.
void write_alarm_lines(std::ostream& out, std::string_view series_id, std::span<const Alarm> alarms);
std::vector<AlarmRecord> read_alarm_lines(std::istream& in);

/// Ground-truth sidecar: `series_id<TAB>true_peak_step` rows, '#' comments
/// (a '#' line with exactly one tab is data, as hashtags start with '#').
void write_truth_sidecar(std::ostream& out, const GroundTruth& truth, std::span<const std::string> order);
GroundTruth read_truth_sidecar(std::istream& in);

/// Fixed top-level keys: precision, recall, mean_abs_delay, matches,
/// false_alarms, missed_peaks, per_series. The three counts are totals; the
/// per-series entries carry the lists.
nlohmann::ordered_json to_json(const AggregateReport& report);
nlohmann::ordered_json to_json(const SeriesEvaluation& evaluation);

/// Human-readable summary table.
void write_report_table(std::ostream& out, const AggregateReport& report);

} // namespace peakmart
