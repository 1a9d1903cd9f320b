// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pwifs/discrete_measure.hpp"

namespace pwifs {

/// c(x, y) = ||x - y||^alpha with alpha in (0, 1]; a metric on R^d.
struct GroundCost {
  double alpha = 1.0;

  /// Throws InvalidInput unless 0 < alpha <= 1.
  void validate() const;
  double operator()(std::span<const double> x, std::span<const double> y) const noexcept;
};

struct TransportEntry {
  std::size_t row = 0;  // atom of the first measure
  std::size_t col = 0;  // atom of the second measure
  double mass = 0.0;
};

/// Sparse coupling between two discrete measures.
struct TransportPlan {
  std::vector<TransportEntry> entries;
  double objective = 0.0;
};

/// Optimality evidence checked against recovered dual potentials.
struct OptimalityCertificate {
  double marginal_violation = 0.0;    // max |row/col sum - weight|
  double dual_violation = 0.0;        // max (u_i + v_j - c_ij)_+
  double slackness_violation = 0.0;   // max |c_ij - u_i - v_j| over the support of the plan
  double duality_gap = 0.0;           // |primal - dual|
  bool passed = false;
};

struct ExactTransport {
  double distance = 0.0;
  TransportPlan plan;
  std::vector<double> row_potential;
  std::vector<double> col_potential;
  OptimalityCertificate certificate;
};

struct ExactOptions {
  /// Largest combined atom count accepted by the dense solver.
  std::size_t max_atoms = 2000;
  double certificate_tolerance = 1e-7;
};

/// Optimal transport cost under `cost`, solved by network simplex.
/// Throws SizeError above the cap, InvalidInput on mismatched dimension
/// or mass, ConvergenceFailure if the certificate does not hold.
ExactTransport wasserstein_exact(const DiscreteMeasure& a, const DiscreteMeasure& b,
                                 const GroundCost& cost = {}, const ExactOptions& options = {});

/// W1 on the line as the L1 distance between CDFs. Requires d = 1 and
/// alpha = 1.
double wasserstein_1d(const DiscreteMeasure& a, const DiscreteMeasure& b, double alpha = 1.0);

struct SinkhornOptions {
  /// Target regularisation; zero selects auto_epsilon.
  double epsilon = 0.0;
  std::size_t max_iter = 20000;
  /// Stop when the L1 marginal violation falls below this.
  double tolerance = 1e-6;
};

struct SinkhornResult {
  /// Debiased divergence OT_e(a,b) - (OT_e(a,a) + OT_e(b,b)) / 2.
  double distance = 0.0;
  /// Half-width of a certified interval around `distance`: the exact
  /// value lies in [lower, upper] and |distance - exact| <= error_bound.
  double error_bound = 0.0;
  double lower = 0.0;  // dual value of c-transformed potentials
  double upper = 0.0;  // cost of the rounded, feasible plan
  double marginal_violation = 0.0;
  double epsilon = 0.0;
  std::size_t iterations = 0;
};

/// Regularisation picked from the cost scale: 1e-3 times the mean pair cost.
double auto_epsilon(const DiscreteMeasure& a, const DiscreteMeasure& b, const GroundCost& cost = {});

/// Log-stabilised Sinkhorn with epsilon scaling. Throws ConvergenceFailure
/// carrying the last violation when max_iter runs out.
SinkhornResult sinkhorn(const DiscreteMeasure& a, const DiscreteMeasure& b,
                        const GroundCost& cost = {}, const SinkhornOptions& options = {});
SinkhornResult sinkhorn(const DiscreteMeasure& a, const DiscreteMeasure& b, const GroundCost& cost,
                        double epsilon, std::size_t max_iter);

/// Sum_i |a_i - b_i| for measures on the same atoms (in any order).
/// Throws InvalidInput when the supports differ.
double tv_distance_on_support(const DiscreteMeasure& a, const DiscreteMeasure& b);

struct IntervalOptions {
  /// Finest cell edge for the hierarchical coupling; zero picks
  /// 1e-4 times the joint bounding-box diagonal.
  double resolution = 0.0;
  /// Atoms per side above which a cell is pre-merged before matching.
  std::size_t cell_atoms = 256;
  /// Atom budget per measure for the coarse exact solve.
  std::size_t coarse_atoms = 700;
  /// Measures at or below this combined size are solved exactly.
  std::size_t exact_atoms = 2000;
};

/// Certified enclosure lower <= W(a, b) <= upper.
struct DistanceInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool exact = false;
};

/// Upper bound from a feasible coupling built bottom-up on nested grids:
/// inside each cell the common mass is matched by exact partial transport,
/// the excess moves on to the parent cell.
double hierarchical_coupling_cost(const DiscreteMeasure& a, const DiscreteMeasure& b,
                                  const GroundCost& cost = {}, const IntervalOptions& options = {});

/// Exact when small enough, otherwise the hierarchical upper bound and a
/// lower bound from the mean difference (alpha = 1) and a coarse exact
/// solve minus the coarsening costs.
DistanceInterval wasserstein_interval(const DiscreteMeasure& a, const DiscreteMeasure& b,
                                      const GroundCost& cost = {},
                                      const IntervalOptions& options = {});

}  // namespace pwifs
