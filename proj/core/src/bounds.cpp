// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwifs/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "json.hpp"
#include "pwifs/error.hpp"
#include "pwifs/invariant.hpp"

namespace pwifs {
namespace {

void check_r(double r, const char* who) {
  if (!(r > 0.0 && r < 1.0))
    throw InvalidInput(std::string(who) + ": r must lie in (0, 1), got " + std::to_string(r));
}

}  // namespace

double contraction_factor(const MapFamily& family, const SamplingMeasure& mu) {
  if (mu.size() != family.size())
    throw InvalidInput("contraction_factor: " + std::to_string(mu.size()) + " weights for " +
                       std::to_string(family.size()) + " maps");
  double r = 0.0;
  for (std::size_t j = 0; j < family.size(); ++j)
    r += mu.weights()[j] * family.lipschitz_constants()[j];
  return r;
}

double aposteriori_bound(const DiscreteMeasure& nu, const MapFamily& family,
                         const SamplingMeasure& mu, double resolution) {
  const double r = contraction_factor(family, mu);
  if (!(r < 1.0)) throw NotContractive("aposteriori_bound: r >= 1", r);
  return certified_residual(nu, family, mu, resolution) / (1.0 - r);
}

double subsequent_invariants_bound(const MapFamily& family, const SamplingMeasure& mu_k,
                                   const SamplingMeasure& mu_next, double B, double M,
                                   double map_drift) {
  const double r = std::max(contraction_factor(family, mu_k), contraction_factor(family, mu_next));
  if (!(r < 1.0)) throw NotContractive("subsequent_invariants_bound: r >= 1", r);
  if (map_drift < 0.0) throw InvalidInput("subsequent_invariants_bound: map_drift must be >= 0");
  const double e = tv_distance(mu_k, mu_next);
  return (M * map_drift + B * e) / (1.0 - r);
}

double tracking_error_bound(double d10, double r) {
  check_r(r, "tracking_error_bound");
  if (!(d10 >= 0.0)) throw InvalidInput("tracking_error_bound: d10 must be >= 0");
  return r / ((1.0 - r) * (1.0 - r)) * d10;
}

double regret_bound(std::span<const double> d10_per_epoch, double r) {
  check_r(r, "regret_bound");
  double total = 0.0;
  for (double d : d10_per_epoch) total += 2.0 * tracking_error_bound(d, r);
  return total;
}

double regret_bound(std::span<const double> d10_per_epoch, std::span<const double> r_per_epoch) {
  if (d10_per_epoch.size() != r_per_epoch.size())
    throw InvalidInput("regret_bound: one r per epoch is required");
  double total = 0.0;
  for (std::size_t k = 0; k < d10_per_epoch.size(); ++k)
    total += 2.0 * tracking_error_bound(d10_per_epoch[k], r_per_epoch[k]);
  return total;
}

DecayReport geometric_decay_check(std::span<const DiscreteMeasure> iterates, double r,
                                  const DecayOptions& options) {
  if (iterates.size() < 3) throw InvalidInput("geometric_decay_check: need at least 3 iterates");
  if (!(r >= 0.0 && r < 1.0)) throw InvalidInput("geometric_decay_check: r must lie in [0, 1)");
  const auto& err = options.iterate_errors;
  if (!err.empty() && err.size() != iterates.size())
    throw InvalidInput("geometric_decay_check: one error per iterate is required");
  auto e = [&](std::size_t i) { return err.empty() ? 0.0 : err[i]; };
  // Only upper ends are needed past d10, so large pairs skip the lower bound.
  auto upper = [&](std::size_t i, std::size_t j) {
    if (iterates[i].size() + iterates[j].size() <= options.interval.exact_atoms)
      return wasserstein_interval(iterates[i], iterates[j], {}, options.interval).upper;
    return hierarchical_coupling_cost(iterates[i], iterates[j], {}, options.interval);
  };

  DecayReport report;
  const DistanceInterval d10 =
      wasserstein_interval(iterates[1], iterates[0], {}, options.interval);
  // The bound is taken at the smallest value the true d10 can have.
  report.d10 = std::max(d10.lower - e(0) - e(1), 0.0);
  const double scale = 1.0 + options.tol;
  report.passed = true;
  double ri = 1.0;
  for (std::size_t i = 0; i + 1 < iterates.size(); ++i, ri *= r) {
    DecayStep step;
    step.i = i;
    step.observed = i == 0 ? d10.upper : upper(i + 1, i);
    step.allowance = e(i) + e(i + 1) + (i == 0 ? d10.upper - report.d10 : 0.0);
    step.bound = ri * report.d10 * scale + step.allowance;
    step.satisfied = step.observed <= step.bound;
    report.passed = report.passed && step.satisfied;
    report.steps.push_back(step);
  }
  const std::size_t last = iterates.size() - 1;
  ri = 1.0;
  const std::size_t stride = std::max<std::size_t>(options.pair_stride, 1);
  for (std::size_t i = 0; i + 2 <= last; ++i, ri *= r) {
    if (i % stride != 0) continue;
    std::vector<std::size_t> partners{i + 2};
    if (last != i + 2) partners.push_back(last);
    for (std::size_t j : partners) {
      DecayPair pair;
      pair.i = i;
      pair.j = j;
      pair.observed = upper(j, i);
      pair.bound = ri / (1.0 - r) * report.d10 * scale + e(i) + e(j) +
                   (d10.upper - report.d10) * ri / (1.0 - r);
      pair.satisfied = pair.observed <= pair.bound;
      report.passed = report.passed && pair.satisfied;
      report.pairs.push_back(pair);
    }
  }
  return report;
}

BoundRecord make_record(std::string name, std::size_t epoch, double bound, double observed,
                        std::string note) {
  return {std::move(name), epoch, bound, observed, observed <= bound + 1e-9, std::move(note)};
}

bool BoundsReport::all_satisfied() const noexcept {
  return std::all_of(records.begin(), records.end(), [](const BoundRecord& r) { return r.satisfied; });
}

std::string to_json(const BoundsReport& report) {
  nlohmann::ordered_json j;
  j["r_per_epoch"] = report.r_per_epoch;
  j["e_observed"] = report.e_observed;
  j["tv_budget"] = report.tv_budget;
  j["B"] = report.B;
  j["M"] = report.M;
  j["absorbing_radius"] = report.absorbing_radius;
  j["records"] = nlohmann::ordered_json::array();
  for (const auto& r : report.records)
    j["records"].push_back({{"name", r.name},
                            {"epoch", r.epoch},
                            {"bound", r.bound},
                            {"observed", r.observed},
                            {"satisfied", r.satisfied},
                            {"note", r.note}});
  j["all_satisfied"] = report.all_satisfied();
  return j.dump(2) + "\n";
}

std::string to_table(const BoundsReport& report) {
  std::string out;
  out += fmt::format("B = {:.6g}   M = {:.6g}   R = {:.6g}   e budget = {:.6g}\n", report.B,
                     report.M, report.absorbing_radius, report.tv_budget);
  for (std::size_t k = 0; k < report.r_per_epoch.size(); ++k)
    out += fmt::format("r[{}] = {:.6f}\n", k, report.r_per_epoch[k]);
  for (std::size_t k = 0; k < report.e_observed.size(); ++k)
    out += fmt::format("e[{}->{}] = {:.6g}\n", k, k + 1, report.e_observed[k]);
  out += fmt::format("\n{:<28} {:>5} {:>14} {:>14}  {}\n", "bound", "epoch", "value", "observed", "ok");
  for (const auto& r : report.records)
    out += fmt::format("{:<28} {:>5} {:>14.6e} {:>14.6e}  {}{}\n", r.name, r.epoch, r.bound,
                       r.observed, r.satisfied ? "yes" : "NO",
                       r.note.empty() ? "" : "  (" + r.note + ")");
  return out;
}

}  // namespace pwifs
