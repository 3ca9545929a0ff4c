#pragma once

#include <span>
#include <string>

#include "peakmart/evaluation.hpp"
#include "peakmart/martingale.hpp"
#include "peakmart/volume_series.hpp"

namespace peakmart {

struct PlotStyle {
    int width = 900;
    int height = 420;
    int margin_left = 70;
    int margin_right = 80;
    int margin_top = 40;
    int margin_bottom = 50;
};

struct PlotInput {
    const VolumeSeries* series = nullptr;
    std::span<const StepTrace> traces;
    std::span<const Alarm> alarms;
    std::span<const PeakLabel> peaks;
    double lambda_threshold = 20.0;
};

/// Renders one series: counts on the left axis, log10 martingale on the
/// right axis, a dashed lambda line, vertical alarm markers (group id
/// "alarms", omitted when there are none) and circled peak markers. The
/// output depends only on the inputs.
std::string render_svg(const PlotInput& input, const PlotStyle& style = {});

/// Escapes &, <, >, " and ' for XML text and attributes.
std::string xml_escape(std::string_view text);

} // namespace peakmart
