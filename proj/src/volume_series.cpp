#include "peakmart/volume_series.hpp"

#include <algorithm>

#include "peakmart/errors.hpp"

namespace peakmart {

ParseError::ParseError(std::size_t line, std::string reason)
    : std::runtime_error("line " + std::to_string(line) + ": " + reason)
    , line_(line)
    , reason_(std::move(reason))
{
}

namespace {

bool has_control_separator(const std::string& text) noexcept
{
    return text.find_first_of("\t\n\r") != std::string::npos;
}

} // namespace

bool is_valid_series_id(const std::string& id) noexcept
{
    return !id.empty() && !has_control_separator(id);
}

void validate(const VolumeSeries& series)
{
    if (!is_valid_series_id(series.id)) {
        throw PreconditionError("series id must be non-empty and contain no tab or newline");
    }
    if (has_control_separator(series.step_label)) {
        throw PreconditionError("step_label of '" + series.id + "' contains a tab or newline");
    }
    if (series.counts.empty()) {
        throw PreconditionError("series '" + series.id + "' is empty");
    }
    if (std::ranges::any_of(series.counts, [](Count c) { return c < 0; })) {
        throw PreconditionError("series '" + series.id + "' has a negative count");
    }
}

} // namespace peakmart
