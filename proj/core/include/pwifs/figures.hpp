// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pwifs/particles.hpp"

namespace pwifs {

/// Plot window: x_min, x_max, y_min, y_max.
using PlotBounds = std::array<double, 4>;

struct ScatterLayer {
  std::string label;
  std::string colour;  // any SVG colour
  std::span<const double> xy;  // interleaved x, y
};

/// Support plot. Points are snapped to a pixels x pixels raster and each
/// occupied pixel is drawn once per layer.
std::string scatter_svg(std::span<const ScatterLayer> layers, const PlotBounds& bounds,
                        const std::string& title, std::size_t pixels = 480);

/// Heat map of row-major masses (rows along y, as histogram_density).
std::string heatmap_svg(std::span<const double> masses, const HistogramGrid& grid,
                        const std::string& title);

struct LineSeries {
  std::string label;
  std::string colour;
  std::vector<double> x;
  std::vector<double> y;
};

/// Line chart; non-positive values are skipped when log_y is set.
std::string line_plot_svg(std::span<const LineSeries> series, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          bool log_y = false);

}  // namespace pwifs
