#include "impactosc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "impactosc/error.hpp"

namespace impactosc::io {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;
    std::vector<double> ticks;

    double map(double v) const { return log ? std::log10(v) : v; }
    double frac(double v) const { return (map(v) - lo) / (hi - lo); }
};

Axis make_axis(double lo, double hi, bool log)
{
    Axis a;
    a.log = log;
    if (!(lo <= hi)) {
        lo = log ? 1.0 : 0.0;
        hi = log ? 10.0 : 1.0;
    }
    if (log) {
        a.lo = std::floor(std::log10(lo));
        a.hi = std::ceil(std::log10(hi));
        if (a.hi <= a.lo) a.hi = a.lo + 1.0;
        const int step = std::max(1, static_cast<int>(std::ceil((a.hi - a.lo) / 8.0)));
        for (int e = static_cast<int>(a.lo); e <= static_cast<int>(a.hi); e += step) a.ticks.push_back(std::pow(10.0, e));
        return a;
    }
    if (hi == lo) {
        const double pad = lo == 0.0 ? 1.0 : 0.1 * std::abs(lo);
        lo -= pad;
        hi += pad;
    }
    const double raw = (hi - lo) / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double f : {1.0, 2.0, 5.0, 10.0}) {
        step = f * mag;
        if (step >= raw) break;
    }
    a.lo = std::floor(lo / step) * step;
    a.hi = std::ceil(hi / step) * step;
    for (double t = a.lo; t <= a.hi + 0.5 * step; t += step) a.ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return a;
}

bool usable(double v, bool log)
{
    return std::isfinite(v) && (!log || v > 0.0);
}

}  // namespace

std::string render_svg(const Plot& plot)
{
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    for (const auto& s : plot.series) {
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!usable(s.x[i], plot.log_x) || !usable(s.y[i], plot.log_y)) continue;
            xlo = std::min(xlo, s.x[i]);
            xhi = std::max(xhi, s.x[i]);
            ylo = std::min(ylo, s.y[i]);
            yhi = std::max(yhi, s.y[i]);
        }
    }
    const Axis ax = make_axis(xlo, xhi, plot.log_x);
    const Axis ay = make_axis(ylo, yhi, plot.log_y);
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double v) { return kLeft + ax.frac(v) * pw; };
    auto py = [&](double v) { return kTop + (1.0 - ay.frac(v)) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(plot.title) << "</text>\n";

    for (double t : ax.ticks) {
        const double x = px(t);
        o << "<line x1=\"" << num(x) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(x) << "\" y2=\"" << num(kTop + ph)
          << "\" stroke=\"#e5e5e5\"/>\n";
        o << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + ph + 16) << "\" text-anchor=\"middle\">"
          << tick_label(t) << "</text>\n";
    }
    for (double t : ay.ticks) {
        const double y = py(t);
        o << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft + pw) << "\" y2=\"" << num(y)
          << "\" stroke=\"#e5e5e5\"/>\n";
        o << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << tick_label(t)
          << "</text>\n";
    }
    o << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 16) << "\" text-anchor=\"middle\">"
      << escape(plot.x_label) << "</text>\n";
    o << "<text transform=\"translate(18," << num(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(plot.y_label) << "</text>\n";

    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const auto& s = plot.series[k];
        const char* color = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (s.style == Series::Style::Line) {
            o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < n; ++i) {
                if (!usable(s.x[i], plot.log_x) || !usable(s.y[i], plot.log_y)) continue;
                o << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
            }
            o << "\"/>\n";
        } else {
            o << "<g fill=\"" << color << "\">\n";
            for (std::size_t i = 0; i < n; ++i) {
                if (!usable(s.x[i], plot.log_x) || !usable(s.y[i], plot.log_y)) continue;
                o << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"1.6\"/>\n";
            }
            o << "</g>\n";
        }
        const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
        const double lx = kLeft + pw + 12.0;
        o << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly - 8) << "\" width=\"12\" height=\"8\" fill=\"" << color
          << "\"/>\n";
        o << "<text x=\"" << num(lx + 18) << "\" y=\"" << num(ly) << "\">" << escape(s.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

void write_svg(const std::filesystem::path& path, const Plot& plot)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << render_svg(plot);
    out.close();
    if (out.fail()) throw Error("write error on " + path.string());
}

}  // namespace impactosc::io
