#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

namespace powertherm {

struct LinePlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
};

// Single-series SVG line chart. Purely a derived view: byte-deterministic
// for identical inputs and never consulted by any computation. Requires at
// least one point and finite, equal-length coordinate spans.
void write_line_plot(const LinePlotSpec& spec, std::span<const double> x,
                     std::span<const double> y, std::ostream& out);
void write_line_plot(const LinePlotSpec& spec, std::span<const double> x,
                     std::span<const double> y, const std::filesystem::path& path);

} // namespace powertherm
