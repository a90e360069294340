#include "govdisc/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace govdisc {

namespace {

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// 1-2-5 step giving roughly `target` ticks.
double nice_step(double span, int target) {
    if (!(span > 0.0)) return 1.0;
    double raw = span / target;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double f = raw / mag;
    return (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0) * mag;
}

} // namespace

std::string render_svg(const LineChart& c) {
    const double ml = 70, mr = 150, mt = 36, mb = 48;
    const double pw = c.width - ml - mr, ph = c.height - mt - mb;

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : c.series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    auto X = [&](double v) { return ml + (v - x0) / (x1 - x0) * pw; };
    auto Y = [&](double v) { return mt + (1.0 - (v - y0) / (y1 - y0)) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << c.width << "\" height=\"" << c.height
       << "\" viewBox=\"0 0 " << c.width << " " << c.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << fmt(ml) << "\" y=\"22\" font-size=\"14\">" << esc(c.title) << "</text>\n";

    const double xs = nice_step(x1 - x0, 8), ys = nice_step(y1 - y0, 6);
    for (double v = std::ceil(x0 / xs) * xs; v <= x1 + 1e-9 * xs; v += xs) {
        os << "<line x1=\"" << fmt(X(v)) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\"" << fmt(X(v)) << "\" y2=\""
           << fmt(mt + ph + 4) << "\" stroke=\"black\"/>";
        os << "<text x=\"" << fmt(X(v)) << "\" y=\"" << fmt(mt + ph + 18) << "\" text-anchor=\"middle\">" << tick(v)
           << "</text>\n";
    }
    for (double v = std::ceil(y0 / ys) * ys; v <= y1 + 1e-9 * ys; v += ys) {
        os << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(Y(v)) << "\" x2=\"" << fmt(ml + pw) << "\" y2=\""
           << fmt(Y(v)) << "\" stroke=\"#e5e5e5\"/>";
        os << "<text x=\"" << fmt(ml - 6) << "\" y=\"" << fmt(Y(v) + 4) << "\" text-anchor=\"end\">" << tick(v)
           << "</text>\n";
    }
    for (double v : c.vertical_rules) {
        if (v < x0 || v > x1) continue;
        os << "<line x1=\"" << fmt(X(v)) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(X(v)) << "\" y2=\""
           << fmt(mt + ph) << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"3,3\"/>\n";
    }
    os << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(pw) << "\" height=\"" << fmt(ph)
       << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (std::size_t k = 0; k < c.series.size(); ++k) {
        const auto& s = c.series[k];
        std::string pts;
        auto flush = [&] {
            if (pts.empty()) return;
            os << "<polyline fill=\"none\" stroke=\"" << esc(s.color) << "\" stroke-width=\"1.2\""
               << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"" << pts << "\"/>\n";
            pts.clear();
        };
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                flush();
                continue;
            }
            pts += fmt(X(s.x[i])) + "," + fmt(Y(s.y[i])) + " ";
        }
        flush();
        const double ly = mt + 14 + 18.0 * static_cast<double>(k);
        os << "<line x1=\"" << fmt(ml + pw + 12) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(ml + pw + 36)
           << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << esc(s.color) << "\" stroke-width=\"2\""
           << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>";
        os << "<text x=\"" << fmt(ml + pw + 42) << "\" y=\"" << fmt(ly + 4) << "\">" << esc(s.name) << "</text>\n";
    }
    os << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(c.height - 8.0) << "\" text-anchor=\"middle\">"
       << esc(c.x_label) << "</text>\n";
    os << "<text transform=\"translate(16," << fmt(mt + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
       << esc(c.y_label) << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

} // namespace govdisc
