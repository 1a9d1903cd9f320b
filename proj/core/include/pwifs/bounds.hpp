// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pwifs/discrete_measure.hpp"
#include "pwifs/maps.hpp"
#include "pwifs/schedule.hpp"
#include "pwifs/transport.hpp"

namespace pwifs {

/// r = sum_j mu(j) L_j.
double contraction_factor(const MapFamily& family, const SamplingMeasure& mu);

/// (1 / (1 - r)) * W1(nu, P* nu), with the residual bounded as in
/// certified_residual. Throws NotContractive when r >= 1.
double aposteriori_bound(const DiscreteMeasure& nu, const MapFamily& family,
                         const SamplingMeasure& mu, double resolution = 0.0);

/// (1 / (1 - r)) * (M * map_drift + B * e) with r = max(r_k, r_next) and
/// e = tv_distance(mu_k, mu_next).
double subsequent_invariants_bound(const MapFamily& family, const SamplingMeasure& mu_k,
                                   const SamplingMeasure& mu_next, double B, double M,
                                   double map_drift = 0.0);

/// r / (1 - r)^2 * d10. Throws InvalidInput unless 0 < r < 1 and d10 >= 0.
double tracking_error_bound(double d10, double r);

/// sum_k 2 r / (1 - r)^2 * d10_k, with one r for all epochs or one per
/// epoch.
double regret_bound(std::span<const double> d10_per_epoch, double r);
double regret_bound(std::span<const double> d10_per_epoch, std::span<const double> r_per_epoch);

struct DecayStep {
  std::size_t i = 0;
  double observed = 0.0;  // upper bound on d(nu^{i+1}, nu^i)
  double bound = 0.0;     // r^i d10 (1 + tol) + allowance
  double allowance = 0.0;
  bool satisfied = false;
};

struct DecayPair {
  std::size_t i = 0, j = 0;
  double observed = 0.0;
  double bound = 0.0;  // r^i / (1 - r) d10 (1 + tol) + allowance
  bool satisfied = false;
};

struct DecayReport {
  double d10 = 0.0;  // lower bound on d(nu^1, nu^0) used in every bound
  std::vector<DecayStep> steps;
  std::vector<DecayPair> pairs;
  bool passed = false;
};

struct DecayOptions {
  double tol = 1e-6;
  /// W1 distance of each computed iterate from the exact one (for merged or
  /// pruned iterates). Empty means the iterates are exact.
  std::vector<double> iterate_errors;
  /// Pairs start at every stride-th iterate.
  std::size_t pair_stride = 3;
  IntervalOptions interval;
};

/// Checks d(nu^{i+1}, nu^i) <= r^i d(nu^1, nu^0) for consecutive iterates
/// and d(nu^j, nu^i) <= r^i / (1 - r) d(nu^1, nu^0) for sampled pairs
/// (j = i + 2 and j = last). Needs at least three iterates.
DecayReport geometric_decay_check(std::span<const DiscreteMeasure> iterates, double r,
                                  const DecayOptions& options = {});

struct BoundRecord {
  std::string name;
  std::size_t epoch = 0;
  double bound = 0.0;
  double observed = 0.0;
  bool satisfied = false;
  std::string note;
};

/// Marks a record satisfied iff observed <= bound + 1e-9.
BoundRecord make_record(std::string name, std::size_t epoch, double bound, double observed,
                        std::string note = {});

struct BoundsReport {
  std::vector<double> r_per_epoch;
  std::vector<double> e_observed;
  double tv_budget = 0.0;
  double B = 0.0;
  double M = 1.0;
  double absorbing_radius = 0.0;
  std::vector<BoundRecord> records;

  bool all_satisfied() const noexcept;
};

std::string to_json(const BoundsReport& report);
std::string to_table(const BoundsReport& report);

}  // namespace pwifs
