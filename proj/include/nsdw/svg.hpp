#pragma once

// Minimal self-contained SVG line charts for trace columns.  No external
// renderer: axes, ticks, legend and polylines are emitted directly.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsdw/trace.hpp"

namespace nsdw {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

namespace detail {

inline std::string fmt_short(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

/// Tick spacing: largest of {1,2,5}*10^k giving at most `max_ticks` steps.
inline double nice_step(double range, int max_ticks) {
    if (!(range > 0.0)) return 1.0;
    double raw = range / max_ticks;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) return m * mag;
    return 10.0 * mag;
}

inline const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
    return colors[i % (sizeof colors / sizeof colors[0])];
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace detail

/// Render series as one SVG line chart.  With `logy` the y axis is log10 and
/// non-positive samples are dropped; a series with no positive samples is an
/// error.  Throws on empty input or unwritable path.
inline void write_line_chart(const std::string& path, const std::string& title,
                             const std::string& xlabel, const std::string& ylabel,
                             std::vector<Series> series, bool logy = false) {
    if (series.empty()) throw std::invalid_argument("write_line_chart: no series");
    for (auto& s : series) {
        if (s.x.size() != s.y.size())
            throw std::invalid_argument("write_line_chart: series '" + s.name +
                                        "' has mismatched x/y lengths");
        if (logy) {
            std::vector<double> fx, fy;
            for (std::size_t i = 0; i < s.y.size(); ++i)
                if (s.y[i] > 0.0) {
                    fx.push_back(s.x[i]);
                    fy.push_back(std::log10(s.y[i]));
                }
            if (fy.empty())
                throw std::invalid_argument("write_line_chart: series '" + s.name +
                                            "' has no positive values for a log axis");
            s.x = std::move(fx);
            s.y = std::move(fy);
        }
        if (s.x.empty())
            throw std::invalid_argument("write_line_chart: series '" + s.name + "' is empty");
    }

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (double v : s.x) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        for (double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (xmax == xmin) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax == ymin) {
        ymin -= 0.5;
        ymax += 0.5;
    }

    const double W = 840, H = 520;
    const double ml = 72, mr = 180, mt = 42, mb = 52;
    const double pw = W - ml - mr, ph = H - mt - mb;
    auto X = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * pw; };
    auto Y = [&](double v) { return mt + ph - (v - ymin) / (ymax - ymin) * ph; };

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_line_chart: cannot open '" + path + "'");
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    f << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    f << "<text x=\"" << ml + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << detail::xml_escape(title)
      << "</text>\n";

    // axes
    f << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
      << mt + ph << "\" stroke=\"black\"/>\n";
    f << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
      << "\" stroke=\"black\"/>\n";

    double xstep = detail::nice_step(xmax - xmin, 8);
    for (double v = std::ceil(xmin / xstep) * xstep; v <= xmax + 1e-9 * xstep; v += xstep) {
        double px = X(v);
        f << "<line x1=\"" << px << "\" y1=\"" << mt + ph << "\" x2=\"" << px << "\" y2=\""
          << mt + ph + 5 << "\" stroke=\"black\"/>\n";
        f << "<text x=\"" << px << "\" y=\"" << mt + ph + 20
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
          << detail::fmt_short(v) << "</text>\n";
    }
    double ystep = detail::nice_step(ymax - ymin, 6);
    for (double v = std::ceil(ymin / ystep) * ystep; v <= ymax + 1e-9 * ystep; v += ystep) {
        double py = Y(v);
        f << "<line x1=\"" << ml - 5 << "\" y1=\"" << py << "\" x2=\"" << ml << "\" y2=\"" << py
          << "\" stroke=\"black\"/>\n";
        f << "<line x1=\"" << ml << "\" y1=\"" << py << "\" x2=\"" << ml + pw << "\" y2=\"" << py
          << "\" stroke=\"#dddddd\"/>\n";
        std::string label = logy ? "1e" + detail::fmt_short(v) : detail::fmt_short(v);
        f << "<text x=\"" << ml - 8 << "\" y=\"" << py + 4
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << label
          << "</text>\n";
    }
    f << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << detail::xml_escape(xlabel) << "</text>\n";
    f << "<text x=\"18\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 18 " << mt + ph / 2 << ")\">"
      << detail::xml_escape(logy ? "log10 " + ylabel : ylabel) << "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        f << "<polyline fill=\"none\" stroke=\"" << detail::palette(i)
          << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t j = 0; j < s.x.size(); ++j) {
            if (j) f << ' ';
            f << detail::fmt_short(X(s.x[j])) << ',' << detail::fmt_short(Y(s.y[j]));
        }
        f << "\"/>\n";
        double ly = mt + 14 + 18.0 * double(i);
        f << "<line x1=\"" << ml + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw + 34
          << "\" y2=\"" << ly << "\" stroke=\"" << detail::palette(i)
          << "\" stroke-width=\"2\"/>\n";
        f << "<text x=\"" << ml + pw + 40 << "\" y=\"" << ly + 4
          << "\" font-family=\"sans-serif\" font-size=\"11\">" << detail::xml_escape(s.name)
          << "</text>\n";
    }
    f << "</svg>\n";
    if (!f) throw std::runtime_error("write_line_chart: write failed for '" + path + "'");
}

/// Long-format companion table for a chart: series,t,value rows.
inline void write_chart_csv(const std::string& path, const std::vector<Series>& series) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_chart_csv: cannot open '" + path + "'");
    f << "series,t,value\n";
    for (const auto& s : series)
        for (std::size_t j = 0; j < s.x.size(); ++j)
            f << s.name << ',' << format_double(s.x[j]) << ',' << format_double(s.y[j]) << '\n';
    if (!f) throw std::runtime_error("write_chart_csv: write failed for '" + path + "'");
}

}  // namespace nsdw
