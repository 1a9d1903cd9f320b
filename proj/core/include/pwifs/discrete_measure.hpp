// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace pwifs {

struct unchecked_t {
  explicit unchecked_t() = default;
};
/// Tag for constructors that skip validation; the caller guarantees the
/// invariants.
inline constexpr unchecked_t unchecked{};

struct BoundingBox {
  std::vector<double> lower;
  std::vector<double> upper;

  double diagonal() const noexcept;
};

/// A probability measure with finitely many atoms on R^d.
///
/// Coordinates are stored row-major (atom i occupies coords[i*d, i*d+d)).
/// Weights are strictly positive and sum to one within 1e-9; exact
/// duplicate points are merged, keeping first-occurrence order.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::size_t dimension, std::vector<double> coords,
                  std::vector<double> weights);
  DiscreteMeasure(unchecked_t, std::size_t dimension, std::vector<double> coords,
                  std::vector<double> weights) noexcept
      : dimension_(dimension), coords_(std::move(coords)), weights_(std::move(weights)) {}

  /// Rescales positive weights to unit mass before validating.
  static DiscreteMeasure normalized(std::size_t dimension, std::vector<double> coords,
                                    std::vector<double> weights);
  static DiscreteMeasure dirac(std::span<const double> point);
  /// Equal weights 1/n on the given points.
  static DiscreteMeasure empirical(std::size_t dimension, std::vector<double> coords);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> point(std::size_t i) const noexcept {
    return {coords_.data() + i * dimension_, dimension_};
  }
  double weight(std::size_t i) const noexcept { return weights_[i]; }
  std::span<const double> coords() const noexcept { return coords_; }
  std::span<const double> weights() const noexcept { return weights_; }

  double total_mass() const noexcept;
  std::vector<double> mean() const;
  BoundingBox bounds() const;

 private:
  std::size_t dimension_ = 0;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

/// Grid merging and lowest-weight pruning, the atom-count control applied
/// after each push-forward.
struct CompressOptions {
  /// Cell edge length; atoms sharing a cell collapse to their weighted
  /// centroid. Zero merges exact duplicates only.
  double resolution = 0.0;
  /// Upper limit on atoms kept after merging; zero means unlimited.
  std::size_t max_atoms = 100000;
};

struct Compressed {
  DiscreteMeasure measure;
  /// Exact cost of the merge coupling, sum_i w_i |x_i - centroid(x_i)|.
  double merge_error = 0.0;
  /// Upper bound for pruning: dropped mass times the support diagonal.
  double prune_error = 0.0;
  double dropped_mass = 0.0;
  std::size_t dropped_atoms = 0;

  /// W1 distance from the input is at most this.
  double error_bound() const noexcept { return merge_error + prune_error; }
};

Compressed compress(const DiscreteMeasure& measure, const CompressOptions& options);

/// Grid merge at the finest power-of-two resolution (from diagonal / 4096
/// upward) that leaves at most max_atoms atoms.
Compressed coarsen_to(const DiscreteMeasure& measure, std::size_t max_atoms);

/// Uniform mixture (1/N) sum_k measures[k], exact duplicates merged.
DiscreteMeasure cesaro_average(std::span<const DiscreteMeasure> measures);

}  // namespace pwifs
