#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "peakmart/volume_series.hpp"

namespace peakmart {

// Canonical format, UTF-8 with LF line endings, one record per line:
//
//     series_id<TAB>t<TAB>count
//
// A line is data iff it contains exactly two tabs, so hashtag ids that start
// with '#' need no escaping. Any other line starting with '#' is a comment.
// The comment "#!step_label <text>" attaches <text> as the step_label of the
// next series id that first appears after it. Empty lines are ignored.

/// Throws ParseError (with the 1-based line number) on malformed lines,
/// non-integer or negative counts, and gaps or duplicates in t.
std::vector<VolumeSeries> parse_canonical_tsv(std::istream& input);
std::vector<VolumeSeries> parse_canonical_tsv(std::string_view text);

/// Inverse of parse_canonical_tsv. Throws PreconditionError on an invalid
/// series and std::runtime_error if the sink fails.
void write_canonical_tsv(std::span<const VolumeSeries> series, std::ostream& output);
std::string to_canonical_tsv(std::span<const VolumeSeries> series);

/// Column layout of a long-format volume file (one row per key and bucket).
/// Columns are 0-based.
struct SnapLayout {
    char delimiter = '\t';
    std::size_t key_column = 0;
    std::size_t time_column = 1;
    std::size_t count_column = 2;
    /// Lines starting with this prefix are skipped; empty disables. Hashtag
    /// keys start with '#', so the presets leave it empty.
    std::string skip_prefix;
    std::size_t header_lines = 0;

    void validate() const;
};

/// Names accepted by snap_layout_preset().
std::vector<std::string> snap_layout_presets();

/// Throws PreconditionError on an unknown preset name.
SnapLayout snap_layout_preset(std::string_view name);

/// Reads a key=value descriptor. Keys: delimiter (a single character or one
/// of tab, comma, space, semicolon, pipe), key_column, time_column,
/// count_column, skip_prefix, header_lines. '#' starts a comment line.
/// Throws ParseError on unknown keys or bad values.
SnapLayout parse_snap_layout(std::string_view text);

/// Groups rows by key in first-appearance order; within a key, rows keep
/// file order and are re-indexed 0..n-1. step_label records the original
/// time of step 0 as "t0=<time>". Throws LayoutMismatchError when a row does
/// not fit the layout; the message says which descriptor key to adjust.
std::vector<VolumeSeries> parse_snap_volume(std::istream& input, const SnapLayout& layout);
std::vector<VolumeSeries> parse_snap_volume(std::string_view text, const SnapLayout& layout);

/// Largest sum over any window_steps consecutive counts (the whole series if
/// it is shorter than the window).
Count peak_window_volume(const VolumeSeries& series, std::size_t window_steps);

/// The k series with the largest peak_window_volume, ties broken by id
/// ascending. Throws PreconditionError if window_steps or k is zero.
std::vector<VolumeSeries> select_top_by_peak_window(
    std::span<const VolumeSeries> series, std::size_t window_steps, std::size_t k);

} // namespace peakmart
