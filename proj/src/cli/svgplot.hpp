#pragma once

#include <string>
#include <vector>

namespace van::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 720;
  int height = 480;
};

/// Static line plot as an SVG document. A pure function of its inputs:
/// identical series and options produce identical bytes. In log mode,
/// points with nonpositive y are dropped; a series with none left is an
/// error.
std::string render_line_plot(const std::vector<Series>& series, const PlotOptions& options);

void write_plot(const std::string& path, const std::vector<Series>& series,
                const PlotOptions& options);

}  // namespace van::cli
