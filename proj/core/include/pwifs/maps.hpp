// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace pwifs {

/// 1-based index of a map within a MapFamily, matching the [1, m] labelling.
struct MapIndex {
  std::size_t value = 1;

  std::size_t zero_based() const noexcept { return value - 1; }
  friend bool operator==(MapIndex, MapIndex) = default;
};

/// Operator 2-norm (largest singular value). Uses the closed form for 2x2
/// and a Jacobi SVD otherwise. Throws InvalidInput on non-finite entries.
double operator_norm(const Eigen::MatrixXd& matrix);

/// f(x) = A x + b on R^d. Immutable; the Lipschitz constant is cached.
class AffineMap {
 public:
  AffineMap(Eigen::MatrixXd matrix, Eigen::VectorXd offset);

  /// Builds from a row-major d*d array and a d-vector.
  static AffineMap from_row_major(std::span<const double> matrix,
                                  std::span<const double> offset);

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(offset_.size()); }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  const Eigen::VectorXd& offset() const noexcept { return offset_; }
  double lipschitz() const noexcept { return lipschitz_; }

  /// Checked evaluation; throws InvalidInput on dimension mismatch.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

  /// Unchecked evaluation into caller storage. `out` must not alias `x`.
  /// Accumulates row by row in a fixed order, so results are reproducible.
  void apply_into(std::span<const double> x, std::span<double> out) const noexcept;

 private:
  Eigen::MatrixXd matrix_;
  Eigen::VectorXd offset_;
  std::vector<double> row_major_;
  double lipschitz_ = 0.0;
};

/// Lipschitz constant of an affine map (cached operator norm).
inline double lipschitz_constant(const AffineMap& map) noexcept { return map.lipschitz(); }

/// A general Lipschitz self-map of R^d with a caller-supplied constant.
/// The constant is trusted, not verified.
class FunctionMap {
 public:
  using Kernel = std::function<void(std::span<const double>, std::span<double>)>;

  FunctionMap(std::size_t dimension, double lipschitz, Kernel kernel);

  std::size_t dimension() const noexcept { return dimension_; }
  double lipschitz() const noexcept { return lipschitz_; }
  void apply_into(std::span<const double> x, std::span<double> out) const { kernel_(x, out); }

 private:
  std::size_t dimension_;
  double lipschitz_;
  Kernel kernel_;
};

using LipschitzMap = std::variant<AffineMap, FunctionMap>;

std::size_t dimension_of(const LipschitzMap& map) noexcept;
double lipschitz_of(const LipschitzMap& map) noexcept;

/// The finite family {f_1, ..., f_m}, all on the same R^d.
class MapFamily {
 public:
  explicit MapFamily(std::vector<LipschitzMap> maps);
  MapFamily(std::initializer_list<AffineMap> maps);

  std::size_t size() const noexcept { return maps_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }

  const LipschitzMap& operator[](MapIndex j) const;
  const std::vector<LipschitzMap>& maps() const noexcept { return maps_; }

  /// L_j for j = 1..m, stored 0-based.
  std::span<const double> lipschitz_constants() const noexcept { return lipschitz_; }
  double max_lipschitz() const noexcept;

  /// ||f_j(0)|| for each map, 0-based.
  std::span<const double> offset_norms() const noexcept { return offset_norms_; }

  bool all_affine() const noexcept { return all_affine_; }

  /// For all-affine families, map j occupies d rows of [A | b] starting at
  /// j * d * (d + 1). Empty otherwise.
  std::span<const double> affine_table() const noexcept { return affine_table_; }

  /// Hot-path evaluation of the map at 0-based position `index`.
  void apply_into(std::size_t index, std::span<const double> x, std::span<double> out) const;

 private:
  std::vector<LipschitzMap> maps_;
  std::size_t dimension_ = 0;
  std::vector<double> lipschitz_;
  std::vector<double> offset_norms_;
  // Row-major [A | b] blocks per map when the whole family is affine.
  std::vector<double> affine_table_;
  bool all_affine_ = false;
};

/// Radius R of an origin-centred ball mapped into itself by every map:
/// R = max_j ||f_j(0)|| / (1 - L_max). Empty when L_max >= 1.
std::optional<double> absorbing_radius(const MapFamily& family);

/// The four-map maple-leaf family on R^2 used by the reference experiment.
MapFamily maple_leaf_family();

}  // namespace pwifs
