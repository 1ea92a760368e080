#include "cli/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "van/errors.hpp"

namespace van::cli {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

constexpr double kMarginLeft = 66.0;
constexpr double kMarginRight = 18.0;
constexpr double kMarginTop = 30.0;
constexpr double kMarginBottom = 46.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c; break;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void absorb(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  void pad() {
    if (!(lo <= hi)) throw BadParams("plot: no finite points to draw");
    if (lo == hi) {
      lo -= 1.0;
      hi += 1.0;
      return;
    }
    const double slack = 0.04 * (hi - lo);
    lo -= slack;
    hi += slack;
  }
};

}  // namespace

std::string render_line_plot(const std::vector<Series>& series, const PlotOptions& options) {
  if (series.empty()) throw BadParams("plot: need at least one series");
  if (options.width < 100 || options.height < 80) throw BadParams("plot: canvas too small");

  // Map every series into plotting space up front; log mode transforms
  // y and drops nonpositive points.
  std::vector<std::vector<std::pair<double, double>>> points(series.size());
  Range xr, yr;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& sr = series[s];
    if (sr.x.size() != sr.y.size())
      throw BadParams("plot: series '" + sr.label + "' has mismatched x/y lengths");
    for (std::size_t i = 0; i < sr.x.size(); ++i) {
      const double x = sr.x[i];
      double y = sr.y[i];
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (options.log_y) {
        if (!(y > 0.0)) continue;
        y = std::log10(y);
      }
      points[s].emplace_back(x, y);
      xr.absorb(x);
      yr.absorb(y);
    }
    if (points[s].empty())
      throw BadParams("plot: series '" + sr.label + "' has no drawable points");
  }
  xr.pad();
  yr.pad();

  const double plot_w = options.width - kMarginLeft - kMarginRight;
  const double plot_h = options.height - kMarginTop - kMarginBottom;
  const auto px = [&](double x) {
    return kMarginLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w;
  };
  const auto py = [&](double y) {
    return kMarginTop + (yr.hi - y) / (yr.hi - yr.lo) * plot_h;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width
      << "\" height=\"" << options.height << "\" viewBox=\"0 0 " << options.width << ' '
      << options.height << "\">\n";
  svg << "<rect width=\"" << options.width << "\" height=\"" << options.height
      << "\" fill=\"#ffffff\"/>\n";

  // Grid and tick labels: five even subdivisions per axis.
  svg << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double yv = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    svg << "<line x1=\"" << fmt(px(xv)) << "\" y1=\"" << fmt(kMarginTop) << "\" x2=\""
        << fmt(px(xv)) << "\" y2=\"" << fmt(kMarginTop + plot_h) << "\"/>\n";
    svg << "<line x1=\"" << fmt(kMarginLeft) << "\" y1=\"" << fmt(py(yv)) << "\" x2=\""
        << fmt(kMarginLeft + plot_w) << "\" y2=\"" << fmt(py(yv)) << "\"/>\n";
  }
  svg << "</g>\n";
  svg << "<g font-family=\"monospace\" font-size=\"11\" fill=\"#333333\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double yv = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    const double y_shown = options.log_y ? std::pow(10.0, yv) : yv;
    svg << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(kMarginTop + plot_h + 16.0)
        << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
    svg << "<text x=\"" << fmt(kMarginLeft - 6.0) << "\" y=\"" << fmt(py(yv) + 4.0)
        << "\" text-anchor=\"end\">" << fmt(y_shown) << "</text>\n";
  }
  svg << "</g>\n";

  // Frame.
  svg << "<rect x=\"" << fmt(kMarginLeft) << "\" y=\"" << fmt(kMarginTop) << "\" width=\""
      << fmt(plot_w) << "\" height=\"" << fmt(plot_h)
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

  // Axis labels and title.
  svg << "<g font-family=\"monospace\" font-size=\"13\" fill=\"#111111\">\n";
  if (!options.title.empty())
    svg << "<text x=\"" << fmt(kMarginLeft + plot_w / 2.0) << "\" y=\"18\" "
        << "text-anchor=\"middle\" font-size=\"15\">" << escape_xml(options.title)
        << "</text>\n";
  if (!options.x_label.empty())
    svg << "<text x=\"" << fmt(kMarginLeft + plot_w / 2.0) << "\" y=\""
        << fmt(options.height - 10.0) << "\" text-anchor=\"middle\">"
        << escape_xml(options.x_label) << "</text>\n";
  if (!options.y_label.empty())
    svg << "<text x=\"16\" y=\"" << fmt(kMarginTop + plot_h / 2.0)
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << fmt(kMarginTop + plot_h / 2.0) << ")\">"
        << escape_xml(options.y_label + (options.log_y ? " (log)" : "")) << "</text>\n";
  svg << "</g>\n";

  // One polyline per series, palette cycling in input order.
  for (std::size_t s = 0; s < series.size(); ++s) {
    svg << "<polyline fill=\"none\" stroke=\"" << kPalette[s % kPaletteSize]
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : points[s]) svg << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
    svg << "\"/>\n";
  }

  // Legend, input order, top-right corner of the frame.
  svg << "<g font-family=\"monospace\" font-size=\"12\" fill=\"#111111\">\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double ly = kMarginTop + 14.0 + 16.0 * static_cast<double>(s);
    const double lx = kMarginLeft + plot_w - 150.0;
    svg << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4.0) << "\" x2=\""
        << fmt(lx + 18.0) << "\" y2=\"" << fmt(ly - 4.0) << "\" stroke=\""
        << kPalette[s % kPaletteSize] << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fmt(lx + 24.0) << "\" y=\"" << fmt(ly) << "\">"
        << escape_xml(series[s].label) << "</text>\n";
  }
  svg << "</g>\n";
  svg << "</svg>\n";
  return svg.str();
}

void write_plot(const std::string& path, const std::vector<Series>& series,
                const PlotOptions& options) {
  const std::string svg = render_line_plot(series, options);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << svg;
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace van::cli
