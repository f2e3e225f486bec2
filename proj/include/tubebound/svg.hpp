// tubebound/svg.hpp
//
// Minimal static SVG line plots: polylines, axis ticks, vertical markers.
// Output is a pure function of the data.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace tubebound::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;  ///< non-finite entries break the polyline
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    std::optional<double> y_max;  ///< clip values above this
    std::vector<Series> series;
    std::vector<double> markers;  ///< vertical dashed lines at these x
};

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

inline std::vector<double> ticks(double lo, double hi, int target = 6) {
    std::vector<double> out;
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double f : {1.0, 2.0, 5.0, 10.0})
        if (f * mag >= raw) {
            step = f * mag;
            break;
        }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) out.push_back(v);
    return out;
}

}  // namespace detail

inline void write_svg(std::ostream& out, const Plot& plot) {
    constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

    const auto ty = [&](double y) { return plot.log_y ? std::log10(y) : y; };
    const auto usable = [&](double y) {
        return std::isfinite(y) && (!plot.log_y || y > 0.0) && (!plot.y_max || y <= *plot.y_max);
    };

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : plot.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            if (usable(s.y[i])) {
                y0 = std::min(y0, ty(s.y[i]));
                y1 = std::max(y1, ty(s.y[i]));
            }
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1;
    if (!std::isfinite(y0)) y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;

    const auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    const auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\">" << detail::escape(plot.title) << "</text>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";

    for (double v : detail::ticks(x0, x1)) {
        const double x = px(v);
        out << "<line x1=\"" << detail::num(x) << "\" y1=\"" << H - B << "\" x2=\"" << detail::num(x) << "\" y2=\""
            << H - B + 5 << "\" stroke=\"black\"/>";
        out << "<text x=\"" << detail::num(x) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">"
            << detail::num(v) << "</text>\n";
    }
    for (double v : detail::ticks(y0, y1)) {
        const double y = py(v);
        out << "<line x1=\"" << L - 5 << "\" y1=\"" << detail::num(y) << "\" x2=\"" << L << "\" y2=\""
            << detail::num(y) << "\" stroke=\"black\"/>";
        out << "<text x=\"" << L - 8 << "\" y=\"" << detail::num(y + 4) << "\" text-anchor=\"end\">"
            << (plot.log_y ? "1e" + detail::num(v) : detail::num(v)) << "</text>\n";
    }
    out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">"
        << detail::escape(plot.x_label) << "</text>\n";
    out << "<text x=\"15\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
        << (T + H - B) / 2 << ")\">" << detail::escape(plot.y_label) << "</text>\n";

    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const auto& s = plot.series[k];
        const char* color = colors[k % 5];
        std::string pts;
        const auto flush = [&] {
            if (!pts.empty())
                out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts
                    << "\"/>\n";
            pts.clear();
        };
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!usable(s.y[i])) {
                flush();
                continue;
            }
            if (!pts.empty()) pts += ' ';
            pts += detail::num(px(s.x[i])) + "," + detail::num(py(ty(s.y[i])));
        }
        flush();
        out << "<text x=\"" << W - R - 150 << "\" y=\"" << T + 15 * (k + 1) << "\" fill=\"" << color << "\">"
            << detail::escape(s.label) << "</text>\n";
    }
    for (double m : plot.markers) {
        if (m < x0 || m > x1) continue;
        const double x = px(m);
        out << "<line x1=\"" << detail::num(x) << "\" y1=\"" << T << "\" x2=\"" << detail::num(x) << "\" y2=\""
            << H - B << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
        out << "<text x=\"" << detail::num(x + 3) << "\" y=\"" << T + 12 << "\" fill=\"gray\">t=" << detail::num(m)
            << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace tubebound::svg
