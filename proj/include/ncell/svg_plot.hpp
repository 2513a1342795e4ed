#pragma once

#include <filesystem>
#include <span>
#include <string>

namespace ncell {

struct PlotLabels {
  std::string title;
  std::string x;
  std::string y;
};

// Minimal self-contained SVG charts for reports; axes span the data range.
std::string svg_line_chart(std::span<const double> x, std::span<const double> y, const PlotLabels& labels,
                           bool log_y = false);
std::string svg_scatter(std::span<const double> x, std::span<const double> y, const PlotLabels& labels);

void write_svg(const std::filesystem::path& path, const std::string& svg);

}  // namespace ncell
