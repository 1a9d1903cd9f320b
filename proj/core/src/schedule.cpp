// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwifs/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pwifs/error.hpp"

namespace pwifs {

SamplingMeasure::SamplingMeasure(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw InvalidInput("SamplingMeasure: empty weight vector");
  double total = 0.0;
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0 || w > 1.0)
      throw InvalidInput("SamplingMeasure: weights must lie in [0, 1]");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidInput("SamplingMeasure: weights sum to " + std::to_string(total) +
                       ", expected 1");
  cdf_.resize(weights_.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    acc += weights_[j];
    cdf_[j] = acc;
    if (weights_[j] > 0.0) last_positive_ = j;
  }
  // Rounding must never let u land past the last index with positive mass.
  for (std::size_t j = last_positive_; j < cdf_.size(); ++j) cdf_[j] = 1.0;
}

SamplingMeasure SamplingMeasure::point_mass(std::size_t m, MapIndex j) {
  if (j.value < 1 || j.value > m) throw InvalidInput("point_mass: index outside [1, m]");
  std::vector<double> w(m, 0.0);
  w[j.zero_based()] = 1.0;
  return SamplingMeasure(std::move(w));
}

SamplingMeasure SamplingMeasure::uniform(std::size_t m) {
  if (m == 0) throw InvalidInput("uniform: m must be positive");
  return SamplingMeasure(std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

double SamplingMeasure::operator[](MapIndex j) const {
  if (j.value < 1 || j.value > weights_.size())
    throw InvalidInput("SamplingMeasure: index outside [1, m]");
  return weights_[j.zero_based()];
}

double tv_distance(const SamplingMeasure& a, const SamplingMeasure& b) {
  if (a.size() != b.size())
    throw InvalidInput("tv_distance: support sizes " + std::to_string(a.size()) + " and " +
                       std::to_string(b.size()) + " differ");
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += std::abs(a.weights()[j] - b.weights()[j]);
  return sum;
}

std::size_t sample_zero_based(const SamplingMeasure& measure, double u) noexcept {
  // Number of cdf entries <= u, i.e. the upper_bound position; counted
  // without branches because the outcome is random.
  const auto& cdf = measure.cdf_;
  std::size_t j = 0;
  if (cdf.size() <= 16) {
    for (double c : cdf) j += static_cast<std::size_t>(c <= u);
  } else {
    j = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
  }
  return std::min(j, measure.last_positive_);
}

MapIndex sample_index(const SamplingMeasure& measure, RandomStream& rng) noexcept {
  return MapIndex{sample_zero_based(measure, rng.uniform()) + 1};
}

Schedule::Schedule(std::vector<Epoch> epochs, double tv_bound)
    : epochs_(std::move(epochs)), tv_bound_(tv_bound) {
  if (!std::isfinite(tv_bound_) || tv_bound_ < 0.0)
    throw InvalidInput("Schedule: tv bound must be finite and non-negative");
  for (std::size_t k = 0; k < epochs_.size(); ++k) {
    if (epochs_[k].length == 0)
      throw InvalidInput("Schedule: epoch " + std::to_string(k) + " has zero length");
    if (epochs_[k].measure.size() != epochs_.front().measure.size())
      throw InvalidInput("Schedule: epoch " + std::to_string(k) +
                         " has a different support size");
  }
}

namespace {
// Table weights such as 0.2 + 0.1 + 0.2 + 0.1 do not sum exactly in binary.
constexpr double kTvSlack = 1e-12;
}  // namespace

ScheduleValidation validate_schedule(const Schedule& schedule) noexcept {
  ScheduleValidation report;
  const auto epochs = schedule.epochs();
  for (std::size_t k = 0; k + 1 < epochs.size(); ++k) {
    TvStep step;
    step.from_epoch = k;
    step.distance = tv_distance(epochs[k].measure, epochs[k + 1].measure);
    step.exceeds_bound = step.distance > schedule.tv_bound() + kTvSlack;
    report.max_step = std::max(report.max_step, step.distance);
    report.passed = report.passed && !step.exceeds_bound;
    report.steps.push_back(step);
  }
  return report;
}

void check_compatible(const Schedule& schedule, const MapFamily& family) {
  for (std::size_t k = 0; k < schedule.size(); ++k)
    if (schedule.epochs()[k].measure.size() != family.size())
      throw InvalidInput("epoch " + std::to_string(k) + " samples over " +
                         std::to_string(schedule.epochs()[k].measure.size()) +
                         " indices but the family has " + std::to_string(family.size()) +
                         " maps");
}

}  // namespace pwifs
