#include "peakmart/svg_plot.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "peakmart/errors.hpp"

namespace peakmart {

std::string xml_escape(std::string_view text)
{
    std::string out;
    out.reserve(text.size());
    for (const char c : text) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        case '\'':
            out += "&apos;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

namespace {

class Frame {
public:
    Frame(const PlotStyle& style, std::size_t steps, double count_max, double log_lo, double log_hi)
        : style_(style)
        , steps_(std::max<std::size_t>(steps, 2) - 1)
        , count_max_(count_max > 0.0 ? count_max : 1.0)
        , log_lo_(log_lo)
        , log_hi_(log_hi > log_lo ? log_hi : log_lo + 1.0)
    {
    }

    double left() const { return style_.margin_left; }
    double right() const { return style_.width - style_.margin_right; }
    double top() const { return style_.margin_top; }
    double bottom() const { return style_.height - style_.margin_bottom; }

    double x(double step) const { return left() + (right() - left()) * step / static_cast<double>(steps_); }
    double y_count(double count) const { return bottom() - (bottom() - top()) * count / count_max_; }
    double y_log(double log_value) const
    {
        const double clamped = std::clamp(log_value, log_lo_, log_hi_);
        return bottom() - (bottom() - top()) * (clamped - log_lo_) / (log_hi_ - log_lo_);
    }

    double log_lo() const { return log_lo_; }
    double log_hi() const { return log_hi_; }
    double count_max() const { return count_max_; }
    std::size_t steps() const { return steps_; }

private:
    PlotStyle style_;
    std::size_t steps_;
    double count_max_;
    double log_lo_;
    double log_hi_;
};

std::string pt(double x, double y)
{
    return fmt::format("{:.2f},{:.2f}", x, y);
}

double nice_step(double range, int target_ticks)
{
    const double raw = range / target_ticks;
    const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
    for (const double m : { 1.0, 2.0, 5.0, 10.0 }) {
        if (raw <= m * magnitude) {
            return m * magnitude;
        }
    }
    return 10.0 * magnitude;
}

} // namespace

std::string render_svg(const PlotInput& input, const PlotStyle& style)
{
    if (input.series == nullptr) {
        throw PreconditionError("render_svg needs a series");
    }
    const auto& series = *input.series;
    const auto count_max = series.counts.empty()
        ? 1.0
        : static_cast<double>(*std::ranges::max_element(series.counts));

    double log_lo = 0.0;
    double log_hi = std::log10(input.lambda_threshold);
    for (const auto& t : input.traces) {
        const double l = std::log10(t.martingale);
        log_lo = std::min(log_lo, l);
        log_hi = std::max(log_hi, l);
    }
    log_lo = std::floor(log_lo);
    log_hi = std::ceil(log_hi);

    const Frame frame(style, series.counts.size(), count_max, log_lo, log_hi);
    std::string svg;
    auto emit = [&svg](std::string line) {
        svg += line;
        svg += '\n';
    };

    emit(R"(<?xml version="1.0" encoding="UTF-8"?>)");
    emit(fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}">)",
        style.width, style.height));
    emit(fmt::format(R"(<title>{}</title>)", xml_escape(series.id)));
    emit(fmt::format(R"(<rect x="0" y="0" width="{}" height="{}" fill="white"/>)", style.width, style.height));
    emit(fmt::format(R"(<text x="{:.2f}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>)",
        (frame.left() + frame.right()) / 2.0, xml_escape(series.id)));

    // Axes and ticks.
    emit(R"(<g id="axes" stroke="black" stroke-width="1" font-family="sans-serif" font-size="10">)");
    emit(fmt::format(R"(<line x1="{0:.2f}" y1="{1:.2f}" x2="{2:.2f}" y2="{1:.2f}"/>)", frame.left(), frame.bottom(),
        frame.right()));
    emit(fmt::format(R"(<line x1="{0:.2f}" y1="{1:.2f}" x2="{0:.2f}" y2="{2:.2f}"/>)", frame.left(), frame.top(),
        frame.bottom()));
    emit(fmt::format(R"(<line x1="{0:.2f}" y1="{1:.2f}" x2="{0:.2f}" y2="{2:.2f}"/>)", frame.right(), frame.top(),
        frame.bottom()));
    const double x_step = nice_step(static_cast<double>(frame.steps()), 8);
    for (int k = 0; k * x_step <= static_cast<double>(frame.steps()) + 1e-9; ++k) {
        const double s = k * x_step;
        emit(fmt::format(R"(<line x1="{0:.2f}" y1="{1:.2f}" x2="{0:.2f}" y2="{2:.2f}"/>)", frame.x(s), frame.bottom(),
            frame.bottom() + 4));
        emit(fmt::format(R"(<text x="{:.2f}" y="{:.2f}" stroke="none" text-anchor="middle">{}</text>)", frame.x(s),
            frame.bottom() + 16, fmt::format("{:g}", s)));
    }
    const double y_step = nice_step(frame.count_max(), 5);
    for (int k = 0; k * y_step <= frame.count_max() + 1e-9; ++k) {
        const double c = k * y_step;
        emit(fmt::format(R"(<text x="{:.2f}" y="{:.2f}" stroke="none" text-anchor="end">{}</text>)", frame.left() - 6,
            frame.y_count(c) + 3, fmt::format("{:g}", c)));
    }
    for (double l = frame.log_lo(); l <= frame.log_hi() + 1e-9; l += 1.0) {
        emit(fmt::format(R"(<text x="{:.2f}" y="{:.2f}" stroke="none" text-anchor="start">1e{}</text>)",
            frame.right() + 6, frame.y_log(l) + 3, static_cast<int>(l)));
    }
    emit(fmt::format(R"(<text x="{:.2f}" y="{:.2f}" stroke="none" text-anchor="middle">step</text>)",
        (frame.left() + frame.right()) / 2.0, frame.bottom() + 34));
    emit(fmt::format(R"svg(<text x="14" y="{:.2f}" stroke="none" text-anchor="middle" transform="rotate(-90 14 {:.2f})">count</text>)svg",
        (frame.top() + frame.bottom()) / 2.0, (frame.top() + frame.bottom()) / 2.0));
    emit(fmt::format(R"svg(<text x="{0:.2f}" y="{1:.2f}" stroke="none" text-anchor="middle" transform="rotate(90 {0:.2f} {1:.2f})">martingale (log10)</text>)svg",
        static_cast<double>(style.width) - 14, (frame.top() + frame.bottom()) / 2.0));
    emit("</g>");

    // Count curve.
    std::string counts_points;
    for (std::size_t t = 0; t < series.counts.size(); ++t) {
        if (t > 0) {
            counts_points += ' ';
        }
        counts_points += pt(frame.x(static_cast<double>(t)), frame.y_count(static_cast<double>(series.counts[t])));
    }
    emit(fmt::format(R"(<polyline id="counts" fill="none" stroke="#1f77b4" stroke-width="1.5" points="{}"/>)",
        counts_points));

    // Martingale curve, split where tested steps are not consecutive.
    emit(R"(<g id="martingale" fill="none" stroke="#d62728" stroke-width="1">)");
    std::size_t i = 0;
    while (i < input.traces.size()) {
        std::size_t j = i;
        std::string points = pt(frame.x(static_cast<double>(input.traces[i].step)),
            frame.y_log(std::log10(input.traces[i].martingale)));
        while (j + 1 < input.traces.size() && input.traces[j + 1].step == input.traces[j].step + 1
               && !input.traces[j].alarmed) {
            ++j;
            points += ' ';
            points += pt(frame.x(static_cast<double>(input.traces[j].step)),
                frame.y_log(std::log10(input.traces[j].martingale)));
        }
        emit(fmt::format(R"(<polyline points="{}"/>)", points));
        i = j + 1;
    }
    emit("</g>");

    const double lambda_y = frame.y_log(std::log10(input.lambda_threshold));
    emit(fmt::format(
        R"(<line id="lambda" x1="{:.2f}" y1="{:.2f}" x2="{:.2f}" y2="{:.2f}" stroke="#d62728" stroke-dasharray="6,4"/>)",
        frame.left(), lambda_y, frame.right(), lambda_y));

    if (!input.alarms.empty()) {
        emit(R"(<g id="alarms" stroke="#2ca02c" stroke-width="1.5">)");
        for (const auto& a : input.alarms) {
            const double x = frame.x(static_cast<double>(a.step));
            emit(fmt::format(R"(<line x1="{0:.2f}" y1="{1:.2f}" x2="{0:.2f}" y2="{2:.2f}"><title>alarm {3}</title></line>)",
                x, frame.top(), frame.bottom(), a.step));
        }
        emit("</g>");
    }

    if (!input.peaks.empty()) {
        emit(R"(<g id="peaks" fill="none" stroke="black" font-family="sans-serif" font-size="10">)");
        for (const auto& p : input.peaks) {
            const double x = frame.x(static_cast<double>(p.step));
            const double y = frame.y_count(static_cast<double>(p.height));
            emit(fmt::format(R"(<circle cx="{:.2f}" cy="{:.2f}" r="4"/>)", x, y));
            emit(fmt::format(R"(<text x="{:.2f}" y="{:.2f}" stroke="none" text-anchor="middle">peak {}</text>)", x,
                std::max(y - 8, frame.top() + 10), p.step));
        }
        emit("</g>");
    }
    emit("</svg>");
    return svg;
}

} // namespace peakmart
