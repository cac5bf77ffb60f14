#pragma once

// Minimal self-contained SVG line and scatter plots.

#include <filesystem>
#include <string>
#include <vector>

namespace impactosc::io {

struct Series {
    enum class Style { Line, Points };
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    Style style = Style::Line;
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<Series> series;
};

/// Non-finite points, and non-positive ones on a log axis, are skipped.
std::string render_svg(const Plot& plot);

void write_svg(const std::filesystem::path& path, const Plot& plot);

}  // namespace impactosc::io
