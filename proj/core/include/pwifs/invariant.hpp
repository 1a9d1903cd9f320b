// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "pwifs/discrete_measure.hpp"
#include "pwifs/maps.hpp"
#include "pwifs/schedule.hpp"
#include "pwifs/transport.hpp"

namespace pwifs {

/// Certified upper bound on W1(nu, P* nu). Takes the smaller of a direct
/// coupling between nu and P* nu and the route through the grid-merged
/// image at `resolution` (coupling to the merged image plus its exact merge
/// cost). Exact when both fit the dense solver.
double certified_residual(const DiscreteMeasure& nu, const MapFamily& family,
                          const SamplingMeasure& mu, double resolution,
                          const IntervalOptions& interval = {});

struct InvariantOptions {
  double tol = 1e-3;
  std::size_t max_iter = 200;
  /// Merge grid; zero picks 1e-4 times the absorbing diameter.
  double resolution = 0.0;
  /// Atom cap after merging. The default leaves room for a fine grid over
  /// a two-dimensional attractor.
  std::size_t max_atoms = std::size_t{1} << 20;
  /// Halve the grid when the residual stops improving for this many
  /// iterations (zero disables refinement).
  std::size_t patience = 4;
  double min_resolution = 0.0;
  /// Start point; empty means the origin.
  std::vector<double> start;
};

struct InvariantEstimate {
  DiscreteMeasure measure;
  std::size_t iterations = 0;
  /// Certified upper bound on W1(measure, P* measure).
  double residual = 0.0;
  /// residual / (1 - r): bound on the distance to the invariant measure.
  double certificate = 0.0;
  double contraction = 0.0;
  double resolution = 0.0;
  std::vector<double> residual_history;
};

/// Iterates nu <- merge(P* nu) from a point mass until the certified
/// residual is at most tol * (1 - r). Throws NotContractive when r >= 1 and
/// ConvergenceFailure (carrying the last residual) after max_iter.
InvariantEstimate estimate_invariant_measure(const MapFamily& family, const SamplingMeasure& mu,
                                             const InvariantOptions& options);
InvariantEstimate estimate_invariant_measure(const MapFamily& family, const SamplingMeasure& mu,
                                             double tol, std::size_t max_iter);

}  // namespace pwifs
