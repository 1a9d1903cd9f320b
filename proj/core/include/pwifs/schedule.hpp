// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pwifs/maps.hpp"
#include "pwifs/rng.hpp"

namespace pwifs {

/// A probability vector over the map indices [1, m].
///
/// Weights are non-negative and sum to one within 1e-12. The cumulative
/// table used for inverse-CDF sampling is built once at construction.
class SamplingMeasure {
 public:
  explicit SamplingMeasure(std::vector<double> weights);

  static SamplingMeasure point_mass(std::size_t m, MapIndex j);
  static SamplingMeasure uniform(std::size_t m);

  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }
  double operator[](MapIndex j) const;

 private:
  friend MapIndex sample_index(const SamplingMeasure&, RandomStream&) noexcept;
  friend std::size_t sample_zero_based(const SamplingMeasure&, double) noexcept;

  std::vector<double> weights_;
  std::vector<double> cdf_;
  std::size_t last_positive_ = 0;
};

/// Sum_j |a_j - b_j|. This is the un-halved convention: the slow-change
/// budget e of a schedule is measured with the same sum.
double tv_distance(const SamplingMeasure& a, const SamplingMeasure& b);

/// Draws j with probability weights_j by inverse CDF on one uniform draw.
MapIndex sample_index(const SamplingMeasure& measure, RandomStream& rng) noexcept;

/// Inverse CDF on a given uniform u in [0, 1); returns a 0-based index.
std::size_t sample_zero_based(const SamplingMeasure& measure, double u) noexcept;

struct Epoch {
  SamplingMeasure measure;
  std::size_t length = 0;
};

/// Ordered epochs with the slow-change budget e.
class Schedule {
 public:
  Schedule(std::vector<Epoch> epochs, double tv_bound);

  std::span<const Epoch> epochs() const noexcept { return epochs_; }
  std::size_t size() const noexcept { return epochs_.size(); }
  double tv_bound() const noexcept { return tv_bound_; }

 private:
  std::vector<Epoch> epochs_;
  double tv_bound_;
};

struct TvStep {
  std::size_t from_epoch = 0;
  double distance = 0.0;
  bool exceeds_bound = false;
};

struct ScheduleValidation {
  std::vector<TvStep> steps;
  bool passed = true;
  double max_step = 0.0;
};

/// Checks every consecutive pair against the budget. Never throws.
ScheduleValidation validate_schedule(const Schedule& schedule) noexcept;

/// Throws InvalidInput when the schedule's support size differs from m.
void check_compatible(const Schedule& schedule, const MapFamily& family);

}  // namespace pwifs
