#include "taml/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace taml {

namespace {

constexpr double kWidth = 800, kHeight = 500;
constexpr double kLeft = 70, kRight = 180, kTop = 24, kBottom = 56;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string plot_traces_svg(const std::vector<PlotSeries>& series) {
    if (series.empty()) throw std::invalid_argument("plot: no series");
    std::size_t max_len = 0;
    double ymin = 0, ymax = 0;
    bool any = false;
    for (const auto& s : series) {
        max_len = std::max(max_len, s.values.size());
        for (double v : s.values) {
            if (!any) {
                ymin = ymax = v;
                any = true;
            }
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (!any || max_len < 1) throw std::invalid_argument("plot: empty series");
    if (ymax == ymin) {
        ymax += 1.0;
        ymin -= 1.0;
    }
    const double xmax = static_cast<double>(max_len);

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const auto sx = [&](double runs) { return kLeft + (runs - 1.0) / std::max(1.0, xmax - 1.0) * plot_w; };
    const auto sy = [&](double v) { return kTop + (ymax - v) / (ymax - ymin) * plot_h; };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
           "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) + "\" fill=\"white\"/>\n";

    // axes
    svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop + plot_h) + "\" x2=\"" + fmt(kLeft + plot_w) +
           "\" y2=\"" + fmt(kTop + plot_h) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kLeft) + "\" y2=\"" +
           fmt(kTop + plot_h) + "\" stroke=\"black\"/>\n";

    // ticks
    const int ticks = 5;
    for (int i = 0; i <= ticks; ++i) {
        const double runs = 1.0 + (xmax - 1.0) * i / ticks;
        const double x = sx(runs);
        svg += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(kTop + plot_h) + "\" x2=\"" + fmt(x) + "\" y2=\"" +
               fmt(kTop + plot_h + 5) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(kTop + plot_h + 20) +
               "\" font-size=\"11\" text-anchor=\"middle\">" + fmt(std::round(runs)) + "</text>\n";
        const double v = ymin + (ymax - ymin) * i / ticks;
        const double y = sy(v);
        svg += "<line x1=\"" + fmt(kLeft - 5) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(kLeft) + "\" y2=\"" + fmt(y) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(y + 4) +
               "\" font-size=\"11\" text-anchor=\"end\">" + fmt(v) + "</text>\n";
    }

    // axis labels
    svg += "<text x=\"" + fmt(kLeft + plot_w / 2) + "\" y=\"" + fmt(kHeight - 14) +
           "\" font-size=\"13\" text-anchor=\"middle\">model runs</text>\n";
    svg += "<text x=\"18\" y=\"" + fmt(kTop + plot_h / 2) +
           "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 " + fmt(kTop + plot_h / 2) +
           ")\">best value</text>\n";

    // one polyline per trace
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        std::string pts;
        for (std::size_t i = 0; i < series[s].values.size(); ++i) {
            pts += fmt(sx(static_cast<double>(i + 1)));
            pts += ',';
            pts += fmt(sy(series[s].values[i]));
            pts += ' ';
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts +
               "\"/>\n";
        const double ly = kTop + 16 + 16 * static_cast<double>(s);
        svg += "<line x1=\"" + fmt(kWidth - kRight + 12) + "\" y1=\"" + fmt(ly - 4) + "\" x2=\"" +
               fmt(kWidth - kRight + 34) + "\" y2=\"" + fmt(ly - 4) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + fmt(kWidth - kRight + 40) + "\" y=\"" + fmt(ly) + "\" font-size=\"11\">" +
               escape_xml(series[s].label) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace taml
