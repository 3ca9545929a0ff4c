#include "peakmart/report_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "peakmart/errors.hpp"

namespace peakmart {

namespace {

template <typename Num>
Num parse_number(std::string_view text, std::size_t line, std::string_view what)
{
    Num value {};
    const auto* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), last, value);
    if (text.empty() || ec != std::errc() || ptr != last) {
        throw ParseError(line, fmt::format("invalid {} '{}'", what, text));
    }
    return value;
}

std::string_view strip_cr(std::string_view line)
{
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    return line;
}

nlohmann::ordered_json optional_real(const std::optional<double>& value)
{
    return value ? nlohmann::ordered_json(*value) : nlohmann::ordered_json(nullptr);
}

} // namespace

std::string format_real(double value)
{
    return fmt::format("{}", value);
}

std::string csv_field(std::string_view text)
{
    const bool needs_quotes = text.find_first_of(",\"") != std::string_view::npos
        || (!text.empty() && (text.front() == ' ' || text.back() == ' '));
    if (!needs_quotes) {
        return std::string(text);
    }
    std::string out = "\"";
    for (const char c : text) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_csv_line(std::string_view line)
{
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    return fields;
}

void write_trace_header(std::ostream& out)
{
    out << trace_csv_header << '\n';
}

void write_trace_rows(std::ostream& out, std::string_view series_id, std::span<const StepTrace> traces)
{
    const std::string id = csv_field(series_id);
    for (const auto& t : traces) {
        out << fmt::format("{},{},{},{},{},{},{}\n", id, t.step, t.count, format_real(t.strangeness),
            format_real(t.p_value), format_real(t.martingale), t.alarmed ? 1 : 0);
    }
}

std::vector<TraceRecord> read_trace_csv(std::istream& in)
{
    std::vector<TraceRecord> records;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto text = strip_cr(line);
        if (line_number == 1) {
            if (text != trace_csv_header) {
                throw ParseError(line_number, "trace CSV header mismatch");
            }
            continue;
        }
        if (text.empty()) {
            continue;
        }
        const auto f = split_csv_line(text);
        if (f.size() != 7) {
            throw ParseError(line_number, "trace row needs 7 fields");
        }
        TraceRecord r;
        r.series_id = f[0];
        r.trace.step = parse_number<std::size_t>(f[1], line_number, "step");
        r.trace.count = parse_number<Count>(f[2], line_number, "count");
        r.trace.strangeness = parse_number<double>(f[3], line_number, "strangeness");
        r.trace.p_value = parse_number<double>(f[4], line_number, "p_value");
        r.trace.martingale = parse_number<double>(f[5], line_number, "martingale");
        const auto alarmed = parse_number<int>(f[6], line_number, "alarmed flag");
        if (alarmed != 0 && alarmed != 1) {
            throw ParseError(line_number, "alarmed flag must be 0 or 1");
        }
        r.trace.alarmed = alarmed == 1;
        records.push_back(std::move(r));
    }
    return records;
}

void write_alarm_lines(std::ostream& out, std::string_view series_id, std::span<const Alarm> alarms)
{
    const std::string id = csv_field(series_id);
    for (const auto& a : alarms) {
        out << fmt::format("{},{},{},{}\n", id, a.step, format_real(a.p_value), format_real(a.martingale_value));
    }
}

std::vector<AlarmRecord> read_alarm_lines(std::istream& in)
{
    std::vector<AlarmRecord> records;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto text = strip_cr(line);
        if (text.empty()) {
            continue;
        }
        const auto f = split_csv_line(text);
        if (f.size() != 4) {
            throw ParseError(line_number, "alarm line needs series_id,step,p_value,martingale");
        }
        AlarmRecord r;
        r.series_id = f[0];
        r.alarm.step = parse_number<std::size_t>(f[1], line_number, "step");
        r.alarm.p_value = parse_number<double>(f[2], line_number, "p_value");
        r.alarm.martingale_value = parse_number<double>(f[3], line_number, "martingale");
        records.push_back(std::move(r));
    }
    return records;
}

void write_truth_sidecar(std::ostream& out, const GroundTruth& truth, std::span<const std::string> order)
{
    out << "# series_id, true_peak_step\n";
    for (const auto& id : order) {
        if (const auto it = truth.find(id); it != truth.end()) {
            for (const std::size_t step : it->second) {
                out << id << '\t' << step << '\n';
            }
        }
    }
}

GroundTruth read_truth_sidecar(std::istream& in)
{
    GroundTruth truth;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        const auto text = strip_cr(line);
        if (text.empty()) {
            continue;
        }
        const auto tab = text.find('\t');
        const bool one_tab = tab != std::string_view::npos && text.find('\t', tab + 1) == std::string_view::npos;
        if (text.front() == '#' && !one_tab) {
            continue;
        }
        if (!one_tab || tab == 0) {
            throw ParseError(line_number, "sidecar row must be series_id<TAB>true_peak_step");
        }
        truth[std::string(text.substr(0, tab))].push_back(
            parse_number<std::size_t>(text.substr(tab + 1), line_number, "peak step"));
    }
    return truth;
}

nlohmann::ordered_json to_json(const SeriesEvaluation& evaluation)
{
    nlohmann::ordered_json out;
    const auto& r = evaluation.report;
    out["series_id"] = evaluation.series_id;
    out["rng_seed"] = evaluation.rng_seed;
    auto& alarms = out["alarms"] = nlohmann::ordered_json::array();
    for (const auto& a : evaluation.alarms) {
        alarms.push_back(a.step);
    }
    auto& peaks = out["peaks"] = nlohmann::ordered_json::array();
    for (const auto& p : evaluation.peaks) {
        peaks.push_back({ { "step", p.step }, { "height", p.height }, { "prominence", p.prominence } });
    }
    auto& matches = out["matches"] = nlohmann::ordered_json::array();
    for (const auto& m : r.matches) {
        matches.push_back({ { "alarm_step", m.alarm_step }, { "peak_step", m.peak_step }, { "delay", m.delay } });
    }
    out["false_alarms"] = r.false_alarms;
    out["missed_peaks"] = r.missed_peaks;
    out["precision"] = r.precision;
    out["recall"] = r.recall;
    out["mean_abs_delay"] = optional_real(r.mean_abs_delay);
    out["precision_by_convention"] = r.precision_by_convention;
    out["recall_by_convention"] = r.recall_by_convention;
    return out;
}

nlohmann::ordered_json to_json(const AggregateReport& report)
{
    nlohmann::ordered_json out;
    out["precision"] = report.precision;
    out["recall"] = report.recall;
    out["mean_abs_delay"] = optional_real(report.mean_abs_delay);
    out["matches"] = report.match_count;
    out["false_alarms"] = report.false_alarm_count;
    out["missed_peaks"] = report.missed_peak_count;
    auto& per_series = out["per_series"] = nlohmann::ordered_json::array();
    for (const auto& s : report.per_series) {
        per_series.push_back(to_json(s));
    }
    return out;
}

void write_report_table(std::ostream& out, const AggregateReport& report)
{
    auto delay_text = [](const std::optional<double>& d) {
        return d ? fmt::format("{:.2f}", *d) : std::string("-");
    };
    out << fmt::format("{:<32} {:>6} {:>6} {:>7} {:>9} {:>7} {:>9}\n", "series", "alarms", "peaks", "matches",
        "precision", "recall", "mean|d|");
    for (const auto& s : report.per_series) {
        const auto& r = s.report;
        out << fmt::format("{:<32} {:>6} {:>6} {:>7} {:>9.3f} {:>7.3f} {:>9}\n", s.series_id, s.alarms.size(),
            s.peaks.size(), r.matches.size(), r.precision, r.recall, delay_text(r.mean_abs_delay));
    }
    out << fmt::format("{:<32} {:>6} {:>6} {:>7} {:>9.3f} {:>7.3f} {:>9}\n", "TOTAL", report.alarm_count,
        report.peak_count, report.match_count, report.precision, report.recall, delay_text(report.mean_abs_delay));
}

} // namespace peakmart
