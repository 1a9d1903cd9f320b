// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwifs/maps.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pwifs/error.hpp"

namespace pwifs {

double operator_norm(const Eigen::MatrixXd& matrix) {
  if (!matrix.allFinite()) throw InvalidInput("operator_norm: matrix has non-finite entries");
  if (matrix.size() == 0) return 0.0;
  if (matrix.rows() == 2 && matrix.cols() == 2) {
    const double a = matrix(0, 0), b = matrix(0, 1), c = matrix(1, 0), d = matrix(1, 1);
    // sigma_max = (|(a+d, c-b)| + |(a-d, b+c)|) / 2
    return 0.5 * (std::hypot(a + d, c - b) + std::hypot(a - d, b + c));
  }
  if (matrix.rows() == 1 && matrix.cols() == 1) return std::abs(matrix(0, 0));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix);
  return svd.singularValues()(0);
}

AffineMap::AffineMap(Eigen::MatrixXd matrix, Eigen::VectorXd offset)
    : matrix_(std::move(matrix)), offset_(std::move(offset)) {
  if (matrix_.rows() != matrix_.cols())
    throw InvalidInput("AffineMap: matrix must be square");
  if (matrix_.rows() != offset_.size())
    throw InvalidInput("AffineMap: matrix is " + std::to_string(matrix_.rows()) +
                       "x" + std::to_string(matrix_.cols()) + " but offset has " +
                       std::to_string(offset_.size()) + " entries");
  if (offset_.size() == 0) throw InvalidInput("AffineMap: dimension must be positive");
  if (!offset_.allFinite()) throw InvalidInput("AffineMap: offset has non-finite entries");
  lipschitz_ = operator_norm(matrix_);
  const auto d = static_cast<std::size_t>(offset_.size());
  row_major_.resize(d * d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c)
      row_major_[r * d + c] = matrix_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

AffineMap AffineMap::from_row_major(std::span<const double> matrix,
                                    std::span<const double> offset) {
  const std::size_t d = offset.size();
  if (matrix.size() != d * d)
    throw InvalidInput("AffineMap: row-major matrix has " + std::to_string(matrix.size()) +
                       " entries, expected " + std::to_string(d * d));
  Eigen::MatrixXd a(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  Eigen::VectorXd b(static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < d; ++r) {
    b(static_cast<Eigen::Index>(r)) = offset[r];
    for (std::size_t c = 0; c < d; ++c)
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = matrix[r * d + c];
  }
  return AffineMap(std::move(a), std::move(b));
}

Eigen::VectorXd AffineMap::apply(const Eigen::VectorXd& x) const {
  if (x.size() != offset_.size())
    throw InvalidInput("AffineMap::apply: point has dimension " + std::to_string(x.size()) +
                       ", map has " + std::to_string(offset_.size()));
  Eigen::VectorXd out(offset_.size());
  apply_into(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
             std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

void AffineMap::apply_into(std::span<const double> x, std::span<double> out) const noexcept {
  const std::size_t d = x.size();
  const double* a = row_major_.data();
  for (std::size_t r = 0; r < d; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < d; ++c) acc += a[r * d + c] * x[c];
    out[r] = acc + offset_[static_cast<Eigen::Index>(r)];
  }
}

FunctionMap::FunctionMap(std::size_t dimension, double lipschitz, Kernel kernel)
    : dimension_(dimension), lipschitz_(lipschitz), kernel_(std::move(kernel)) {
  if (dimension_ == 0) throw InvalidInput("FunctionMap: dimension must be positive");
  if (!std::isfinite(lipschitz_) || lipschitz_ < 0.0)
    throw InvalidInput("FunctionMap: Lipschitz constant must be finite and non-negative");
  if (!kernel_) throw InvalidInput("FunctionMap: empty kernel");
}

std::size_t dimension_of(const LipschitzMap& map) noexcept {
  return std::visit([](const auto& m) { return m.dimension(); }, map);
}

double lipschitz_of(const LipschitzMap& map) noexcept {
  return std::visit([](const auto& m) { return m.lipschitz(); }, map);
}

MapFamily::MapFamily(std::initializer_list<AffineMap> maps)
    : MapFamily(std::vector<LipschitzMap>(maps.begin(), maps.end())) {}

MapFamily::MapFamily(std::vector<LipschitzMap> maps) : maps_(std::move(maps)) {
  if (maps_.empty()) throw InvalidInput("MapFamily: at least one map is required");
  dimension_ = dimension_of(maps_.front());
  all_affine_ = true;
  for (std::size_t j = 0; j < maps_.size(); ++j) {
    if (dimension_of(maps_[j]) != dimension_)
      throw InvalidInput("MapFamily: map " + std::to_string(j + 1) + " has dimension " +
                         std::to_string(dimension_of(maps_[j])) + ", expected " +
                         std::to_string(dimension_));
    lipschitz_.push_back(lipschitz_of(maps_[j]));
    std::vector<double> origin(dimension_, 0.0), image(dimension_);
    std::visit([&](const auto& m) { m.apply_into(origin, image); }, maps_[j]);
    double norm2 = 0.0;
    for (double v : image) norm2 += v * v;
    offset_norms_.push_back(std::sqrt(norm2));
    if (!std::holds_alternative<AffineMap>(maps_[j])) all_affine_ = false;
  }
  if (all_affine_) {
    const std::size_t d = dimension_;
    affine_table_.reserve(maps_.size() * d * (d + 1));
    for (const auto& m : maps_) {
      const auto& a = std::get<AffineMap>(m);
      for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c)
          affine_table_.push_back(a.matrix()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
        affine_table_.push_back(a.offset()(static_cast<Eigen::Index>(r)));
      }
    }
  }
}

const LipschitzMap& MapFamily::operator[](MapIndex j) const {
  if (j.value < 1 || j.value > maps_.size())
    throw InvalidInput("MapFamily: index " + std::to_string(j.value) + " outside [1, " +
                       std::to_string(maps_.size()) + "]");
  return maps_[j.zero_based()];
}

double MapFamily::max_lipschitz() const noexcept {
  return *std::max_element(lipschitz_.begin(), lipschitz_.end());
}

void MapFamily::apply_into(std::size_t index, std::span<const double> x,
                           std::span<double> out) const {
  if (all_affine_) {
    const std::size_t d = dimension_;
    const double* row = affine_table_.data() + index * d * (d + 1);
    for (std::size_t r = 0; r < d; ++r, row += d + 1) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) acc += row[c] * x[c];
      out[r] = acc + row[d];
    }
    return;
  }
  std::visit([&](const auto& m) { m.apply_into(x, out); }, maps_[index]);
}

std::optional<double> absorbing_radius(const MapFamily& family) {
  const double l_max = family.max_lipschitz();
  if (!(l_max < 1.0)) return std::nullopt;
  const auto norms = family.offset_norms();
  const double b_max = *std::max_element(norms.begin(), norms.end());
  return b_max / (1.0 - l_max);
}

MapFamily maple_leaf_family() {
  const double s = 0.355;
  return MapFamily{
      AffineMap::from_row_major(std::vector{0.8, 0.0, 0.0, 0.8}, std::vector{0.1, 0.04}),
      AffineMap::from_row_major(std::vector{0.5, 0.0, 0.0, 0.5}, std::vector{0.25, 0.4}),
      AffineMap::from_row_major(std::vector{s, s, s, -s}, std::vector{0.266, 0.078}),
      AffineMap::from_row_major(std::vector{s, -s, -s, -s}, std::vector{0.378, 0.434}),
  };
}

}  // namespace pwifs
