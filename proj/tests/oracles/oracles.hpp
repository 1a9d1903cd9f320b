// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference computations used only by the tests. None of them
// call into the library's solvers.

#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace oracle {

/// Largest singular value of a 2x2 matrix {a, b; c, d}, by power iteration
/// on A^T A.
double spectral_norm_2x2(const std::array<double, 4>& m);

/// Largest singular value of a row-major d x d matrix, by power iteration.
double spectral_norm(const std::vector<double>& m, std::size_t d);

/// sum_j w_j L_j.
double weighted_sum(const std::vector<double>& w, const std::vector<double>& l);

/// Integral of |F_a - F_b| on the line, with each CDF evaluated by direct
/// summation at every breakpoint.
double cdf_distance(const std::vector<double>& xa, const std::vector<double>& wa,
                    const std::vector<double>& xb, const std::vector<double>& wb);

/// Optimal value of the transport LP min <C, P> over couplings of (a, b) by
/// enumerating every basic feasible solution. Meant for n, m <= 4.
double transport_by_vertices(const std::vector<double>& a, const std::vector<double>& b,
                             const std::vector<std::vector<double>>& cost);

}  // namespace oracle
