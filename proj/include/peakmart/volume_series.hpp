#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace peakmart {

/// Number of newly informed nodes (mentions) in one time step.
using Count = std::int64_t;

/// A labeled per-step volume series. Steps are the implicit indices 0..n-1.
struct VolumeSeries {
    std::string id;
    std::vector<Count> counts;
    /// Free-text unit annotation; metadata only.
    std::string step_label;

    bool operator==(const VolumeSeries&) const = default;
};

/// Throws PreconditionError unless the series is non-empty, all counts are
/// non-negative, and the id is non-empty and free of tabs and newlines
/// (step_label may not contain them either).
void validate(const VolumeSeries& series);

bool is_valid_series_id(const std::string& id) noexcept;

} // namespace peakmart
