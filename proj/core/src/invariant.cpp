// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwifs/invariant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pwifs/bounds.hpp"
#include "pwifs/error.hpp"
#include "pwifs/particles.hpp"

namespace pwifs {
namespace {

double default_resolution(const MapFamily& family) {
  const auto radius = absorbing_radius(family);
  return radius ? 1e-4 * 2.0 * *radius : 0.0;
}

double coupling_upper(const DiscreteMeasure& a, const DiscreteMeasure& b, double resolution,
                      const IntervalOptions& interval) {
  if (a.size() + b.size() <= interval.exact_atoms)
    return wasserstein_exact(a, b, {}, {interval.exact_atoms, 1e-7}).distance;
  IntervalOptions fine = interval;
  if (resolution > 0.0) fine.resolution = resolution;
  return hierarchical_coupling_cost(a, b, {}, fine);
}

}  // namespace

double certified_residual(const DiscreteMeasure& nu, const MapFamily& family,
                          const SamplingMeasure& mu, double resolution,
                          const IntervalOptions& interval) {
  const DiscreteMeasure image = push_forward(nu, family, mu);
  double best = coupling_upper(nu, image, resolution / 4.0, interval);
  if (resolution > 0.0) {
    const Compressed merged = compress(image, {resolution, 0});
    best = std::min(best, coupling_upper(nu, merged.measure, resolution, interval) +
                              merged.error_bound());
  }
  return best;
}

InvariantEstimate estimate_invariant_measure(const MapFamily& family, const SamplingMeasure& mu,
                                             const InvariantOptions& options) {
  if (!(options.tol > 0.0)) throw InvalidInput("estimate_invariant_measure: tol must be positive");
  const double r = contraction_factor(family, mu);
  if (!(r < 1.0))
    throw NotContractive("estimate_invariant_measure: contraction factor " + std::to_string(r) +
                             " is not below 1",
                         r);
  std::vector<double> start = options.start;
  if (start.empty()) start.assign(family.dimension(), 0.0);
  if (start.size() != family.dimension())
    throw InvalidInput("estimate_invariant_measure: start point has the wrong dimension");

  double h = options.resolution > 0.0 ? options.resolution : default_resolution(family);
  const double target = options.tol * (1.0 - r);
  IntervalOptions interval;

  InvariantEstimate out{DiscreteMeasure::dirac(start), 0, 0.0, 0.0, 0.0, 0.0, {}};
  out.contraction = r;
  Compressed next = push_forward(out.measure, family, mu, {h, options.max_atoms});
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t k = 0; k < options.max_iter; ++k) {
    // Residual of the current iterate, certified through its merged image.
    double residual = coupling_upper(out.measure, next.measure, h, interval) + next.error_bound();
    if (residual > target && out.measure.size() * family.size() <= interval.exact_atoms)
      residual = std::min(residual, certified_residual(out.measure, family, mu, h, interval));
    out.residual_history.push_back(residual);
    out.iterations = k;
    out.residual = residual;
    out.resolution = h;
    if (residual <= target) {
      out.certificate = residual / (1.0 - r);
      return out;
    }
    if (residual < 0.98 * best) {
      best = residual;
      since_best = 0;
    } else if (options.patience > 0 && ++since_best >= options.patience && h > 0.0 &&
               h / 2.0 >= options.min_resolution) {
      h /= 2.0;
      best = std::numeric_limits<double>::infinity();
      since_best = 0;
    }
    out.measure = std::move(next.measure);
    next = push_forward(out.measure, family, mu, {h, options.max_atoms});
  }
  out.certificate = out.residual / (1.0 - r);
  throw ConvergenceFailure("estimate_invariant_measure: residual " + std::to_string(out.residual) +
                               " above " + std::to_string(target) + " after " +
                               std::to_string(options.max_iter) + " iterations",
                           out.residual);
}

InvariantEstimate estimate_invariant_measure(const MapFamily& family, const SamplingMeasure& mu,
                                             double tol, std::size_t max_iter) {
  InvariantOptions options;
  options.tol = tol;
  options.max_iter = max_iter;
  return estimate_invariant_measure(family, mu, options);
}

}  // namespace pwifs
