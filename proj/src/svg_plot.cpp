#include "powertherm/svg_plot.hpp"

#include "powertherm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace powertherm {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 60.0;

std::string fixed2(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fixed6g(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;

    double place(double v, double px_lo, double px_hi) const
    {
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

Range span_of(std::span<const double> values)
{
    Range r{*std::min_element(values.begin(), values.end()),
            *std::max_element(values.begin(), values.end())};
    if (r.hi == r.lo) { // degenerate: pad so the line sits mid-plot
        r.lo -= 1.0;
        r.hi += 1.0;
    }
    return r;
}

} // namespace

void write_line_plot(const LinePlotSpec& spec, std::span<const double> x,
                     std::span<const double> y, std::ostream& out)
{
    if (x.empty() || x.size() != y.size()) {
        throw ConfigError("line plot needs equal-length, nonempty x and y");
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
            throw ConfigError("line plot coordinates must be finite");
        }
    }
    const Range rx = span_of(x);
    const Range ry = span_of(y);
    const double left = kMargin;
    const double right = kWidth - kMargin / 2.0;
    const double top = kMargin / 2.0;
    const double bottom = kHeight - kMargin;

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "  <rect width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"white\"/>\n";
    out << "  <text x=\"" << kWidth / 2.0 << "\" y=\"20\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"14\">"
        << spec.title << "</text>\n";

    // Axes.
    out << "  <line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right
        << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << bottom << "\" stroke=\"black\"/>\n";

    // End-of-range tick labels plus axis titles.
    out << "  <text x=\"" << left << "\" y=\"" << bottom + 16.0
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << fixed6g(rx.lo) << "</text>\n";
    out << "  <text x=\"" << right << "\" y=\"" << bottom + 16.0
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << fixed6g(rx.hi) << "</text>\n";
    out << "  <text x=\"" << left - 6.0 << "\" y=\"" << bottom
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << fixed6g(ry.lo) << "</text>\n";
    out << "  <text x=\"" << left - 6.0 << "\" y=\"" << top + 4.0
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << fixed6g(ry.hi) << "</text>\n";
    out << "  <text x=\"" << (left + right) / 2.0 << "\" y=\"" << kHeight - 12.0
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << spec.x_label << "</text>\n";
    out << "  <text x=\"16\" y=\"" << (top + bottom) / 2.0
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 16 "
        << (top + bottom) / 2.0 << ")\">" << spec.y_label << "</text>\n";

    out << "  <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) {
            out << ' ';
        }
        out << fixed2(rx.place(x[i], left, right)) << ','
            << fixed2(ry.place(y[i], bottom, top));
    }
    out << "\"/>\n</svg>\n";
    if (!out) {
        throw IoError("failed writing SVG plot");
    }
}

void write_line_plot(const LinePlotSpec& spec, std::span<const double> x,
                     std::span<const double> y, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    write_line_plot(spec, x, y, out);
}

} // namespace powertherm
