// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0
//
// Primal network simplex for the dense transportation problem
//
//   min sum_ij c_ij x_ij   s.t.  sum_j x_ij = a_i,  sum_i x_ij = b_j,  x >= 0.
//
// Rows and columns are nodes of a bipartite graph with an artificial root.
// The spanning tree is kept strongly feasible (Cunningham's leaving-arc
// rule), which rules out cycling on the heavily degenerate problems that
// equal-weight point clouds produce.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pwifs::detail {

struct TransportArc {
  std::size_t row = 0;
  std::size_t col = 0;
  double mass = 0.0;
};

struct TransportSolution {
  std::vector<TransportArc> flows;  // basic arcs with positive mass
  std::vector<double> row_potential;
  std::vector<double> col_potential;
  double objective = 0.0;
  std::size_t pivots = 0;
};

/// Solves the balanced problem. `cost` is row-major rows x cols.
/// Supplies and demands must be positive with equal totals (checked by the
/// caller). Potentials satisfy u_i + v_j <= c_ij up to rounding and are
/// normalised so that u_0 = 0.
TransportSolution solve_transport(std::span<const double> supply,
                                  std::span<const double> demand,
                                  std::span<const double> cost);

}  // namespace pwifs::detail
