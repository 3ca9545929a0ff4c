#include "peakmart/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "peakmart/errors.hpp"

namespace peakmart {

namespace {

constexpr std::string_view step_label_pragma = "#!step_label ";

template <typename Int>
bool parse_int(std::string_view text, Int& out)
{
    if (text.empty()) {
        return false;
    }
    const auto* first = text.data();
    const auto* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split(std::string_view line, char delimiter)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delimiter, start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string read_all(std::istream& input)
{
    std::ostringstream buffer;
    buffer << input.rdbuf();
    return std::move(buffer).str();
}

// Calls fn(line_number, line) for every line, with a trailing CR removed.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn)
{
    std::size_t line_number = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        fn(++line_number, line);
        start = end + 1;
    }
}

// Stable grouping by id in first-appearance order.
class SeriesGrouper {
public:
    VolumeSeries& get(std::string_view id, bool& created)
    {
        const auto [it, inserted] = index_.try_emplace(std::string(id), series_.size());
        created = inserted;
        if (inserted) {
            series_.push_back(VolumeSeries { .id = std::string(id), .counts = {}, .step_label = {} });
        }
        return series_[it->second];
    }

    std::vector<VolumeSeries> release() { return std::move(series_); }

private:
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<VolumeSeries> series_;
};

char parse_delimiter(std::string_view value)
{
    if (value == "tab" || value == "\\t") {
        return '\t';
    }
    if (value == "comma") {
        return ',';
    }
    if (value == "space") {
        return ' ';
    }
    if (value == "semicolon") {
        return ';';
    }
    if (value == "pipe") {
        return '|';
    }
    if (value.size() == 1 && value[0] != '\n') {
        return value[0];
    }
    throw PreconditionError(fmt::format("unsupported delimiter '{}'", value));
}

std::string describe_delimiter(char delimiter)
{
    switch (delimiter) {
    case '\t':
        return "tab";
    case ',':
        return "comma";
    case ' ':
        return "space";
    default:
        return fmt::format("'{}'", delimiter);
    }
}

std::string_view trim(std::string_view text)
{
    const auto first = text.find_first_not_of(" \t");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(" \t");
    return text.substr(first, last - first + 1);
}

} // namespace

std::vector<VolumeSeries> parse_canonical_tsv(std::string_view text)
{
    SeriesGrouper groups;
    std::string pending_label;
    for_each_line(text, [&](std::size_t line_number, std::string_view line) {
        if (line.empty()) {
            return;
        }
        const auto tabs = std::ranges::count(line, '\t');
        if (line.front() == '#' && tabs != 2) {
            if (line.starts_with(step_label_pragma)) {
                pending_label = std::string(line.substr(step_label_pragma.size()));
            }
            return;
        }
        if (tabs != 2) {
            throw ParseError(line_number, "malformed line: expected series_id<TAB>t<TAB>count");
        }
        const auto fields = split(line, '\t');
        const auto id = fields[0];
        if (id.empty()) {
            throw ParseError(line_number, "empty series id");
        }
        std::size_t t = 0;
        if (!parse_int(fields[1], t)) {
            throw ParseError(line_number, fmt::format("non-integer step '{}'", fields[1]));
        }
        Count count = 0;
        if (!parse_int(fields[2], count)) {
            throw ParseError(line_number, fmt::format("non-integer count '{}'", fields[2]));
        }
        if (count < 0) {
            throw ParseError(line_number, "negative count");
        }
        bool created = false;
        auto& series = groups.get(id, created);
        if (created && !pending_label.empty()) {
            series.step_label = std::move(pending_label);
            pending_label.clear();
        }
        const auto expected = series.counts.size();
        if (t < expected) {
            throw ParseError(line_number, fmt::format("duplicate step {} for series '{}'", t, id));
        }
        if (t > expected) {
            throw ParseError(line_number, fmt::format("gap in steps for series '{}': expected {}, got {}", id, expected, t));
        }
        series.counts.push_back(count);
    });
    return groups.release();
}

std::vector<VolumeSeries> parse_canonical_tsv(std::istream& input)
{
    const std::string text = read_all(input);
    return parse_canonical_tsv(std::string_view(text));
}

void write_canonical_tsv(std::span<const VolumeSeries> series, std::ostream& output)
{
    for (const auto& s : series) {
        validate(s);
    }
    output << "# peakmart canonical volume series: series_id, t, count\n";
    for (const auto& s : series) {
        if (!s.step_label.empty()) {
            output << step_label_pragma << s.step_label << '\n';
        }
        for (std::size_t t = 0; t < s.counts.size(); ++t) {
            output << s.id << '\t' << t << '\t' << s.counts[t] << '\n';
        }
    }
    output.flush();
    if (!output) {
        throw std::runtime_error("failed to write canonical TSV output");
    }
}

std::string to_canonical_tsv(std::span<const VolumeSeries> series)
{
    std::ostringstream out;
    write_canonical_tsv(series, out);
    return std::move(out).str();
}

// ---------------------------------------------------------------------------

void SnapLayout::validate() const
{
    if (delimiter == '\n' || delimiter == '\r') {
        throw PreconditionError("layout delimiter cannot be a line terminator");
    }
    if (key_column == time_column || key_column == count_column || time_column == count_column) {
        throw PreconditionError("layout key, time and count columns must be distinct");
    }
}

std::vector<std::string> snap_layout_presets()
{
    return { "long-tsv", "long-csv" };
}

SnapLayout snap_layout_preset(std::string_view name)
{
    if (name == "long-tsv") {
        return SnapLayout {};
    }
    if (name == "long-csv") {
        return SnapLayout { .delimiter = ',', .key_column = 0, .time_column = 1, .count_column = 2,
            .skip_prefix = {}, .header_lines = 1 };
    }
    throw PreconditionError(fmt::format("unknown layout preset '{}'", name));
}

SnapLayout parse_snap_layout(std::string_view text)
{
    SnapLayout layout;
    for_each_line(text, [&](std::size_t line_number, std::string_view line) {
        const auto trimmed = trim(line);
        if (trimmed.empty() || trimmed.front() == '#') {
            return;
        }
        const auto eq = trimmed.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(line_number, "expected key=value");
        }
        const auto key = trim(trimmed.substr(0, eq));
        // skip_prefix may legitimately be whitespace-sensitive, so keep raw.
        const auto raw_value = line.substr(line.find('=') + 1);
        const auto value = trim(raw_value);
        auto column = [&](std::size_t& field) {
            if (!parse_int(value, field)) {
                throw ParseError(line_number, fmt::format("{} must be a non-negative integer", key));
            }
        };
        try {
            if (key == "delimiter") {
                layout.delimiter = parse_delimiter(value);
            } else if (key == "key_column") {
                column(layout.key_column);
            } else if (key == "time_column") {
                column(layout.time_column);
            } else if (key == "count_column") {
                column(layout.count_column);
            } else if (key == "header_lines") {
                column(layout.header_lines);
            } else if (key == "skip_prefix") {
                layout.skip_prefix = std::string(value);
            } else {
                throw ParseError(line_number, fmt::format("unknown layout key '{}'", key));
            }
        } catch (const PreconditionError& e) {
            throw ParseError(line_number, e.what());
        }
    });
    try {
        layout.validate();
    } catch (const PreconditionError& e) {
        throw ParseError(0, e.what());
    }
    return layout;
}

std::vector<VolumeSeries> parse_snap_volume(std::string_view text, const SnapLayout& layout)
{
    layout.validate();
    const std::size_t needed = std::max({ layout.key_column, layout.time_column, layout.count_column }) + 1;
    SeriesGrouper groups;
    for_each_line(text, [&](std::size_t line_number, std::string_view line) {
        if (line_number <= layout.header_lines || line.empty()) {
            return;
        }
        if (!layout.skip_prefix.empty() && line.starts_with(layout.skip_prefix)) {
            return;
        }
        const auto fields = split(line, layout.delimiter);
        if (fields.size() < needed) {
            throw LayoutMismatchError(line_number,
                fmt::format("found {} field(s) splitting on {}, but the layout needs at least {}; "
                            "adjust 'delimiter' or the column indices in the layout descriptor",
                    fields.size(), describe_delimiter(layout.delimiter), needed));
        }
        const auto key = fields[layout.key_column];
        if (!is_valid_series_id(std::string(key))) {
            throw LayoutMismatchError(line_number,
                fmt::format("key column {} is empty or contains a tab; adjust 'key_column' or 'delimiter'",
                    layout.key_column));
        }
        Count count = 0;
        const auto count_text = trim(fields[layout.count_column]);
        if (!parse_int(count_text, count) || count < 0) {
            throw LayoutMismatchError(line_number,
                fmt::format("count column {} holds '{}', not a non-negative integer; adjust 'count_column', "
                            "'header_lines' or 'skip_prefix'",
                    layout.count_column, count_text));
        }
        bool created = false;
        auto& series = groups.get(key, created);
        if (created) {
            series.step_label = fmt::format("t0={}", trim(fields[layout.time_column]));
            if (!is_valid_series_id(series.step_label)) {
                throw LayoutMismatchError(line_number, "time column contains a tab; adjust 'time_column'");
            }
        }
        series.counts.push_back(count);
    });
    return groups.release();
}

std::vector<VolumeSeries> parse_snap_volume(std::istream& input, const SnapLayout& layout)
{
    const std::string text = read_all(input);
    return parse_snap_volume(std::string_view(text), layout);
}

// ---------------------------------------------------------------------------

Count peak_window_volume(const VolumeSeries& series, std::size_t window_steps)
{
    if (window_steps == 0) {
        throw PreconditionError("window_steps must be at least 1");
    }
    const auto& counts = series.counts;
    const std::size_t width = std::min(window_steps, counts.size());
    Count sum = std::accumulate(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(width), Count { 0 });
    Count best = sum;
    for (std::size_t t = width; t < counts.size(); ++t) {
        sum += counts[t] - counts[t - width];
        best = std::max(best, sum);
    }
    return best;
}

std::vector<VolumeSeries> select_top_by_peak_window(
    std::span<const VolumeSeries> series, std::size_t window_steps, std::size_t k)
{
    if (window_steps == 0 || k == 0) {
        throw PreconditionError("select_top_by_peak_window needs window_steps >= 1 and k >= 1");
    }
    std::vector<std::pair<Count, std::size_t>> ranked;
    ranked.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        ranked.emplace_back(peak_window_volume(series[i], window_steps), i);
    }
    std::ranges::stable_sort(ranked, [&](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first > b.first;
        }
        return series[a.second].id < series[b.second].id;
    });
    std::vector<VolumeSeries> top;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
        top.push_back(series[ranked[i].second]);
    }
    return top;
}

} // namespace peakmart
