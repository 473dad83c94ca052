#include "pdsde/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pdsde/errors.hpp"

namespace pdsde {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string escape(const std::string& s) {
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

struct Range {
    double lo, hi;
};

Range padded(double lo, double hi) {
    if (!(hi > lo)) {
        const double w = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
        return {lo - w, hi + w};
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
    const PlotSeries& p = spec.points;
    if (p.x.size() != p.y.size() || (!p.err.empty() && p.err.size() != p.y.size())) {
        throw InvalidParameter("render_svg: series lengths differ");
    }
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    if (!p.x.empty()) {
        xmin = *std::min_element(p.x.begin(), p.x.end());
        xmax = *std::max_element(p.x.begin(), p.x.end());
        ymin = ymax = p.y[0];
        for (std::size_t k = 0; k < p.y.size(); ++k) {
            const double e = p.err.empty() ? 0.0 : p.err[k];
            ymin = std::min(ymin, p.y[k] - e);
            ymax = std::max(ymax, p.y[k] + e);
        }
        if (spec.line) {
            for (double x : {xmin, xmax}) {
                const double y = spec.line->slope * x + spec.line->intercept;
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
        }
    }
    const Range xr = padded(xmin, xmax);
    const Range yr = padded(ymin, ymax);
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto sy = [&](double y) { return kTop + (1.0 - (y - yr.lo) / (yr.hi - yr.lo)) * ph; };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
      << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.title)
      << "</text>\n";
    s << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = xr.lo + (xr.hi - xr.lo) * t / 4.0;
        const double yv = yr.lo + (yr.hi - yr.lo) * t / 4.0;
        s << "<text x=\"" << num(sx(xv)) << "\" y=\"" << num(kTop + ph + 16) << "\" text-anchor=\"middle\">" << num(xv)
          << "</text>\n";
        s << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(sy(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
          << "</text>\n";
    }
    s << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 12) << "\" text-anchor=\"middle\">"
      << escape(spec.x_label) << "</text>\n";
    s << "<text transform=\"translate(16," << num(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(spec.y_label) << "</text>\n";
    if (spec.line && !p.x.empty()) {
        s << "<line x1=\"" << num(sx(xr.lo)) << "\" y1=\"" << num(sy(spec.line->slope * xr.lo + spec.line->intercept))
          << "\" x2=\"" << num(sx(xr.hi)) << "\" y2=\"" << num(sy(spec.line->slope * xr.hi + spec.line->intercept))
          << "\" stroke=\"steelblue\" stroke-dasharray=\"6 4\"/>\n";
    }
    for (std::size_t k = 0; k < p.x.size(); ++k) {
        if (!p.err.empty() && p.err[k] > 0.0) {
            s << "<line x1=\"" << num(sx(p.x[k])) << "\" y1=\"" << num(sy(p.y[k] - p.err[k])) << "\" x2=\""
              << num(sx(p.x[k])) << "\" y2=\"" << num(sy(p.y[k] + p.err[k])) << "\" stroke=\"black\"/>\n";
        }
        s << "<circle cx=\"" << num(sx(p.x[k])) << "\" cy=\"" << num(sy(p.y[k])) << "\" r=\"4\" fill=\"firebrick\"/>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace pdsde
