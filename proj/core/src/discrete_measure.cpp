// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwifs/discrete_measure.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "cell_index.hpp"
#include "measure_ops.hpp"
#include "pwifs/error.hpp"

namespace pwifs {
namespace {

struct MergedCells {
  std::vector<double> coords;
  std::vector<double> weights;
  std::vector<std::uint32_t> cell_of;  // cell id per input atom
};

// Groups atoms by key and replaces each group with its weighted centroid.
// Single-atom groups keep their coordinates bit-for-bit.
template <typename KeyFn>
MergedCells merge_by_key(std::size_t d, std::span<const double> coords,
                         std::span<const double> weights, KeyFn&& key_of) {
  const std::size_t n = weights.size();
  detail::CellIndex index(d, n);
  MergedCells out;
  out.cell_of.resize(n);
  std::vector<std::int64_t> key(d);
  std::vector<std::uint32_t> count;
  std::vector<std::size_t> first;
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = coords.data() + i * d;
    key_of(x, key.data());
    const std::uint32_t id = index.insert(key);
    out.cell_of[i] = id;
    if (id == out.weights.size()) {
      out.weights.push_back(0.0);
      out.coords.resize(out.coords.size() + d, 0.0);
      count.push_back(0);
      first.push_back(i);
    }
    const double w = weights[i];
    out.weights[id] += w;
    double* acc = out.coords.data() + static_cast<std::size_t>(id) * d;
    for (std::size_t c = 0; c < d; ++c) acc[c] += w * x[c];
    ++count[id];
  }
  for (std::size_t id = 0; id < out.weights.size(); ++id) {
    double* c = out.coords.data() + id * d;
    if (count[id] == 1) {
      std::copy_n(coords.data() + first[id] * d, d, c);
    } else {
      for (std::size_t k = 0; k < d; ++k) c[k] /= out.weights[id];
    }
  }
  return out;
}

std::int64_t bits_of(double v) noexcept {
  return std::bit_cast<std::int64_t>(v + 0.0);  // folds -0.0 into +0.0
}

MergedCells merge_exact(std::size_t d, std::span<const double> coords,
                        std::span<const double> weights) {
  return merge_by_key(d, coords, weights, [d](const double* x, std::int64_t* key) {
    for (std::size_t c = 0; c < d; ++c) key[c] = bits_of(x[c]);
  });
}

double distance(const double* x, const double* y, std::size_t d) noexcept {
  double s = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    const double t = x[c] - y[c];
    s += t * t;
  }
  return std::sqrt(s);
}

void validate(std::size_t d, std::span<const double> coords, std::span<const double> weights) {
  if (d == 0) throw InvalidInput("DiscreteMeasure: dimension must be positive");
  if (coords.size() != weights.size() * d)
    throw InvalidInput("DiscreteMeasure: " + std::to_string(coords.size()) +
                       " coordinates do not match " + std::to_string(weights.size()) +
                       " atoms of dimension " + std::to_string(d));
  if (weights.empty()) throw InvalidInput("DiscreteMeasure: no atoms");
  for (double c : coords)
    if (!std::isfinite(c)) throw InvalidInput("DiscreteMeasure: non-finite coordinate");
  for (double w : weights)
    if (!std::isfinite(w) || w < 0.0)
      throw InvalidInput("DiscreteMeasure: weights must be finite and non-negative");
}

// Drops zero weights in place.
void drop_zero_weights(std::size_t d, std::vector<double>& coords, std::vector<double>& weights) {
  std::size_t kept = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    if (kept != i) {
      weights[kept] = weights[i];
      std::copy_n(coords.begin() + static_cast<std::ptrdiff_t>(i * d), d,
                  coords.begin() + static_cast<std::ptrdiff_t>(kept * d));
    }
    ++kept;
  }
  weights.resize(kept);
  coords.resize(kept * d);
}

}  // namespace

double BoundingBox::diagonal() const noexcept {
  double s = 0.0;
  for (std::size_t c = 0; c < lower.size(); ++c) {
    const double t = upper[c] - lower[c];
    s += t * t;
  }
  return std::sqrt(s);
}

DiscreteMeasure::DiscreteMeasure(std::size_t dimension, std::vector<double> coords,
                                 std::vector<double> weights) {
  validate(dimension, coords, weights);
  drop_zero_weights(dimension, coords, weights);
  if (weights.empty()) throw InvalidInput("DiscreteMeasure: all weights are zero");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9)
    throw InvalidInput("DiscreteMeasure: weights sum to " + std::to_string(total) +
                       ", expected 1");
  auto merged = merge_exact(dimension, coords, weights);
  dimension_ = dimension;
  coords_ = std::move(merged.coords);
  weights_ = std::move(merged.weights);
}

DiscreteMeasure DiscreteMeasure::normalized(std::size_t dimension, std::vector<double> coords,
                                            std::vector<double> weights) {
  validate(dimension, coords, weights);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw InvalidInput("DiscreteMeasure: total mass must be positive");
  for (double& w : weights) w /= total;
  return DiscreteMeasure(dimension, std::move(coords), std::move(weights));
}

DiscreteMeasure DiscreteMeasure::dirac(std::span<const double> point) {
  return DiscreteMeasure(point.size(), std::vector<double>(point.begin(), point.end()), {1.0});
}

DiscreteMeasure DiscreteMeasure::empirical(std::size_t dimension, std::vector<double> coords) {
  if (dimension == 0 || coords.empty() || coords.size() % dimension != 0)
    throw InvalidInput("DiscreteMeasure::empirical: coordinate count must be a positive multiple of the dimension");
  const std::size_t n = coords.size() / dimension;
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  return normalized(dimension, std::move(coords), std::move(weights));
}

double DiscreteMeasure::total_mass() const noexcept {
  return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

std::vector<double> DiscreteMeasure::mean() const {
  std::vector<double> m(dimension_, 0.0);
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t c = 0; c < dimension_; ++c) m[c] += weights_[i] * coords_[i * dimension_ + c];
  return m;
}

BoundingBox DiscreteMeasure::bounds() const {
  BoundingBox box;
  box.lower.assign(dimension_, std::numeric_limits<double>::infinity());
  box.upper.assign(dimension_, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t c = 0; c < dimension_; ++c) {
      box.lower[c] = std::min(box.lower[c], coords_[i * dimension_ + c]);
      box.upper[c] = std::max(box.upper[c], coords_[i * dimension_ + c]);
    }
  return box;
}

namespace detail {

Compressed compress_raw(std::size_t d, std::vector<double> coords, std::vector<double> weights,
                        const CompressOptions& options) {
  if (!(options.resolution >= 0.0) || !std::isfinite(options.resolution))
    throw InvalidInput("compress: resolution must be finite and non-negative");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw InvalidInput("compress: total mass must be positive");

  MergedCells merged;
  double merge_error = 0.0;
  if (options.resolution > 0.0) {
    const double inv = 1.0 / options.resolution;
    merged = merge_by_key(d, coords, weights, [d, inv](const double* x, std::int64_t* key) {
      for (std::size_t c = 0; c < d; ++c) {
        const double cell = std::floor(x[c] * inv);
        if (!(std::abs(cell) < 0x1.0p62))
          throw InvalidInput("compress: coordinate too large for the merge grid");
        key[c] = static_cast<std::int64_t>(cell);
      }
    });
    for (std::size_t i = 0; i < weights.size(); ++i)
      merge_error += weights[i] * distance(coords.data() + i * d,
                                           merged.coords.data() + static_cast<std::size_t>(merged.cell_of[i]) * d, d);
    merge_error /= total;
  } else {
    merged = merge_exact(d, coords, weights);
  }

  Compressed out{DiscreteMeasure(unchecked, d, {}, {})};
  out.merge_error = merge_error;
  std::vector<double>& w = merged.weights;
  std::vector<double>& x = merged.coords;

  if (options.max_atoms > 0 && w.size() > options.max_atoms) {
    std::vector<std::size_t> order(w.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
    std::vector<std::size_t> keep(order.begin(),
                                  order.begin() + static_cast<std::ptrdiff_t>(options.max_atoms));
    std::sort(keep.begin(), keep.end());
    double dropped = 0.0;
    for (std::size_t k = options.max_atoms; k < order.size(); ++k) dropped += w[order[k]];
    const DiscreteMeasure before(unchecked, d, x, w);
    const double diameter = before.bounds().diagonal();
    std::vector<double> kx, kw;
    kx.reserve(keep.size() * d);
    kw.reserve(keep.size());
    for (std::size_t i : keep) {
      kw.push_back(w[i]);
      kx.insert(kx.end(), x.begin() + static_cast<std::ptrdiff_t>(i * d),
                x.begin() + static_cast<std::ptrdiff_t>(i * d + d));
    }
    out.dropped_atoms = w.size() - keep.size();
    out.dropped_mass = dropped / total;
    out.prune_error = out.dropped_mass * diameter;
    w = std::move(kw);
    x = std::move(kx);
  }
  const double kept_total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= kept_total;
  out.measure = DiscreteMeasure(unchecked, d, std::move(x), std::move(w));
  return out;
}

}  // namespace detail

Compressed compress(const DiscreteMeasure& measure, const CompressOptions& options) {
  return detail::compress_raw(measure.dimension(),
                              std::vector<double>(measure.coords().begin(), measure.coords().end()),
                              std::vector<double>(measure.weights().begin(), measure.weights().end()),
                              options);
}

Compressed coarsen_to(const DiscreteMeasure& measure, std::size_t max_atoms) {
  if (max_atoms == 0) throw InvalidInput("coarsen_to: max_atoms must be positive");
  if (measure.size() <= max_atoms) return compress(measure, {0.0, 0});
  const double diagonal = measure.bounds().diagonal();
  for (double h = diagonal / 4096.0;; h *= 2.0) {
    Compressed out = compress(measure, {h, 0});
    if (out.measure.size() <= max_atoms) return out;
  }
}

DiscreteMeasure cesaro_average(std::span<const DiscreteMeasure> measures) {
  if (measures.empty()) throw InvalidInput("cesaro_average: empty list");
  const std::size_t d = measures.front().dimension();
  const double scale = 1.0 / static_cast<double>(measures.size());
  std::vector<double> coords, weights;
  for (const auto& m : measures) {
    if (m.dimension() != d) throw InvalidInput("cesaro_average: dimensions differ");
    coords.insert(coords.end(), m.coords().begin(), m.coords().end());
    for (double w : m.weights()) weights.push_back(w * scale);
  }
  auto merged = merge_exact(d, coords, weights);
  return DiscreteMeasure(unchecked, d, std::move(merged.coords), std::move(merged.weights));
}

}  // namespace pwifs
