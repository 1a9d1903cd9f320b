// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwifs/figures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "pwifs/error.hpp"

namespace pwifs {
namespace {

constexpr double kMargin = 56.0;

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

std::string header(double width, double height, const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
      "viewBox=\"0 0 {0:.0f} {1:.0f}\" font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2:.1f}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{3}</text>\n",
      width, height, width / 2.0, escape(title));
}

std::string tick(double v) { return fmt::format("{:.3g}", v); }

void check_bounds(const PlotBounds& b) {
  if (!(b[1] > b[0]) || !(b[3] > b[2]) || !std::isfinite(b[0]) || !std::isfinite(b[3]))
    throw InvalidInput("figure bounds need max > min");
}

// Frame with four ticks per axis around the plot area [x0, x0+w] x [y0, y0+h].
std::string frame(double x0, double y0, double w, double h, const PlotBounds& b,
                  const std::string& x_label, const std::string& y_label) {
  std::string out = fmt::format(
      "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
      "stroke=\"black\"/>\n",
      x0, y0, w, h);
  for (int t = 0; t <= 4; ++t) {
    const double f = t / 4.0;
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n",
                       x0 + f * w, y0 + h + 16, tick(b[0] + f * (b[1] - b[0])));
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n", x0 - 4,
                       y0 + h - f * h + 4, tick(b[2] + f * (b[3] - b[2])));
  }
  if (!x_label.empty())
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n",
                       x0 + w / 2, y0 + h + 34, escape(x_label));
  if (!y_label.empty())
    out += fmt::format(
        "<text x=\"14\" y=\"{0:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {0:.1f})\">"
        "{1}</text>\n",
        y0 + h / 2, escape(y_label));
  return out;
}

std::string legend(double x, double y, const std::vector<std::pair<std::string, std::string>>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].first.empty()) continue;
    const double row = y + 16.0 * static_cast<double>(i);
    out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n",
                       x, row - 9, items[i].second);
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", x + 14, row, escape(items[i].first));
  }
  return out;
}

// White to dark blue.
std::string shade(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const auto channel = [t](double from, double to) {
    return static_cast<int>(std::lround(from + (to - from) * t));
  };
  return fmt::format("#{:02x}{:02x}{:02x}", channel(255, 8), channel(255, 48), channel(255, 107));
}

}  // namespace

std::string scatter_svg(std::span<const ScatterLayer> layers, const PlotBounds& bounds,
                        const std::string& title, std::size_t pixels) {
  check_bounds(bounds);
  if (pixels == 0) throw InvalidInput("scatter_svg: pixels must be positive");
  const double side = static_cast<double>(pixels);
  std::string out = header(side + 2 * kMargin + 90, side + 2 * kMargin, title);
  out += frame(kMargin, kMargin, side, side, bounds, "x", "y");
  std::vector<std::pair<std::string, std::string>> items;
  const double sx = side / (bounds[1] - bounds[0]);
  const double sy = side / (bounds[3] - bounds[2]);
  for (const auto& layer : layers) {
    if (layer.xy.size() % 2 != 0) throw InvalidInput("scatter_svg: odd coordinate count");
    std::vector<std::uint64_t> cells;
    cells.reserve(layer.xy.size() / 2);
    for (std::size_t i = 0; i + 1 < layer.xy.size(); i += 2) {
      const double fx = (layer.xy[i] - bounds[0]) * sx;
      const double fy = (layer.xy[i + 1] - bounds[2]) * sy;
      if (!(fx >= 0.0 && fx <= side && fy >= 0.0 && fy <= side)) continue;
      const auto px = std::min<std::uint64_t>(static_cast<std::uint64_t>(fx), pixels - 1);
      const auto py = std::min<std::uint64_t>(static_cast<std::uint64_t>(fy), pixels - 1);
      cells.push_back(py * pixels + px);
    }
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    out += fmt::format("<g fill=\"{}\" fill-opacity=\"0.8\">\n", layer.colour);
    for (std::uint64_t c : cells) {
      const double x = kMargin + static_cast<double>(c % pixels);
      const double y = kMargin + side - 1.0 - static_cast<double>(c / pixels);
      out += fmt::format("<rect x=\"{:.0f}\" y=\"{:.0f}\" width=\"1\" height=\"1\"/>\n", x, y);
    }
    out += "</g>\n";
    items.emplace_back(layer.label, layer.colour);
  }
  out += legend(kMargin + side + 12, kMargin + 12, items);
  out += "</svg>\n";
  return out;
}

std::string heatmap_svg(std::span<const double> masses, const HistogramGrid& grid,
                        const std::string& title) {
  if (grid.bins_x == 0 || grid.bins_y == 0 || masses.size() != grid.bins_x * grid.bins_y)
    throw InvalidInput("heatmap_svg: mass count does not match the grid");
  const PlotBounds bounds{grid.x_min, grid.x_max, grid.y_min, grid.y_max};
  check_bounds(bounds);
  const double side = 480.0;
  const double cw = side / static_cast<double>(grid.bins_x);
  const double ch = side / static_cast<double>(grid.bins_y);
  const double top = *std::max_element(masses.begin(), masses.end());
  std::string out = header(side + 2 * kMargin, side + 2 * kMargin, title);
  for (std::size_t iy = 0; iy < grid.bins_y; ++iy)
    for (std::size_t ix = 0; ix < grid.bins_x; ++ix) {
      const double m = masses[iy * grid.bins_x + ix];
      if (!(m > 0.0)) continue;
      // Square-root scale keeps sparse regions visible.
      out += fmt::format(
          "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
          kMargin + static_cast<double>(ix) * cw,
          kMargin + side - static_cast<double>(iy + 1) * ch, cw, ch, shade(std::sqrt(m / top)));
    }
  out += frame(kMargin, kMargin, side, side, bounds, "x", "y");
  out += "</svg>\n";
  return out;
}

std::string line_plot_svg(std::span<const LineSeries> series, const std::string& title,
                          const std::string& x_label, const std::string& y_label, bool log_y) {
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  auto usable = [log_y](double y) { return std::isfinite(y) && (!log_y || y > 0.0); };
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw InvalidInput("line_plot_svg: x and y lengths differ");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.y[i]) || !std::isfinite(s.x[i])) continue;
      const double y = log_y ? std::log10(s.y[i]) : s.y[i];
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
  if (!(y_hi > y_lo)) y_hi = y_lo + 1.0;
  if (!log_y) y_lo = std::min(y_lo, 0.0);

  const double w = 640.0, h = 360.0;
  std::string out = header(w + 2 * kMargin + 140, h + 2 * kMargin, title);
  out += frame(kMargin, kMargin, w, h, {x_lo, x_hi, y_lo, y_hi}, x_label,
               log_y ? "log10 " + y_label : y_label);
  std::vector<std::pair<std::string, std::string>> items;
  for (const auto& s : series) {
    std::string points;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.y[i]) || !std::isfinite(s.x[i])) continue;
      const double y = log_y ? std::log10(s.y[i]) : s.y[i];
      points += fmt::format("{:.2f},{:.2f} ", kMargin + (s.x[i] - x_lo) / (x_hi - x_lo) * w,
                            kMargin + h - (y - y_lo) / (y_hi - y_lo) * h);
    }
    if (!points.empty()) points.pop_back();
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" points=\"{}\"/>\n",
                       s.colour, points);
    items.emplace_back(s.label, s.colour);
  }
  out += legend(kMargin + w + 12, kMargin + 12, items);
  out += "</svg>\n";
  return out;
}

}  // namespace pwifs
