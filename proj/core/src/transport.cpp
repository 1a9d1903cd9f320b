// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwifs/transport.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "cell_index.hpp"
#include "measure_ops.hpp"
#include "network_simplex.hpp"
#include "pwifs/error.hpp"

namespace pwifs {
namespace {

double pair_cost(const double* x, const double* y, std::size_t d, double alpha) noexcept {
  double s = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    const double t = x[c] - y[c];
    s += t * t;
  }
  const double r = std::sqrt(s);
  return alpha == 1.0 ? r : std::pow(r, alpha);
}

void check_pair(const DiscreteMeasure& a, const DiscreteMeasure& b, const char* who) {
  if (a.dimension() != b.dimension())
    throw InvalidInput(std::string(who) + ": dimensions differ (" + std::to_string(a.dimension()) +
                       " vs " + std::to_string(b.dimension()) + ")");
  if (std::abs(a.total_mass() - b.total_mass()) > 1e-9)
    throw InvalidInput(std::string(who) + ": total masses differ by more than 1e-9");
}

std::vector<double> cost_matrix(const DiscreteMeasure& a, const DiscreteMeasure& b, double alpha) {
  const std::size_t n = a.size(), m = b.size(), d = a.dimension();
  std::vector<double> c(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      c[i * m + j] = pair_cost(a.coords().data() + i * d, b.coords().data() + j * d, d, alpha);
  return c;
}

}  // namespace

void GroundCost::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw InvalidInput("GroundCost: alpha must lie in (0, 1], got " + std::to_string(alpha));
}

double GroundCost::operator()(std::span<const double> x, std::span<const double> y) const noexcept {
  return pair_cost(x.data(), y.data(), std::min(x.size(), y.size()), alpha);
}

ExactTransport wasserstein_exact(const DiscreteMeasure& a, const DiscreteMeasure& b,
                                 const GroundCost& cost, const ExactOptions& options) {
  cost.validate();
  check_pair(a, b, "wasserstein_exact");
  if (a.size() + b.size() > options.max_atoms)
    throw SizeError("wasserstein_exact: " + std::to_string(a.size() + b.size()) +
                    " atoms exceed the exact-solver cap of " + std::to_string(options.max_atoms) +
                    "; use sinkhorn or wasserstein_interval");

  const std::size_t n = a.size(), m = b.size();
  const std::vector<double> c = cost_matrix(a, b, cost.alpha);
  auto sol = detail::solve_transport(a.weights(), b.weights(), c);

  ExactTransport out;
  out.distance = sol.objective;
  out.plan.objective = sol.objective;
  out.plan.entries.reserve(sol.flows.size());
  for (const auto& f : sol.flows) out.plan.entries.push_back({f.row, f.col, f.mass});
  out.row_potential = std::move(sol.row_potential);
  out.col_potential = std::move(sol.col_potential);

  OptimalityCertificate& cert = out.certificate;
  std::vector<double> rows(n, 0.0), cols(m, 0.0);
  for (const auto& e : out.plan.entries) {
    rows[e.row] += e.mass;
    cols[e.col] += e.mass;
    const double slack = c[e.row * m + e.col] - out.row_potential[e.row] - out.col_potential[e.col];
    cert.slackness_violation = std::max(cert.slackness_violation, std::abs(slack));
  }
  for (std::size_t i = 0; i < n; ++i)
    cert.marginal_violation = std::max(cert.marginal_violation, std::abs(rows[i] - a.weight(i)));
  for (std::size_t j = 0; j < m; ++j)
    cert.marginal_violation = std::max(cert.marginal_violation, std::abs(cols[j] - b.weight(j)));
  double dual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dual += a.weight(i) * out.row_potential[i];
    for (std::size_t j = 0; j < m; ++j)
      cert.dual_violation = std::max(
          cert.dual_violation, out.row_potential[i] + out.col_potential[j] - c[i * m + j]);
  }
  for (std::size_t j = 0; j < m; ++j) dual += b.weight(j) * out.col_potential[j];
  cert.duality_gap = std::abs(out.distance - dual);
  const double tol = options.certificate_tolerance;
  cert.passed = cert.marginal_violation <= tol && cert.dual_violation <= tol &&
                cert.slackness_violation <= tol && cert.duality_gap <= tol;
  if (!cert.passed)
    throw ConvergenceFailure(
        "wasserstein_exact: optimality certificate failed",
        std::max({cert.marginal_violation, cert.dual_violation, cert.slackness_violation,
                  cert.duality_gap}));
  return out;
}

double wasserstein_1d(const DiscreteMeasure& a, const DiscreteMeasure& b, double alpha) {
  if (a.dimension() != 1 || b.dimension() != 1)
    throw InvalidInput("wasserstein_1d: both measures must be one-dimensional");
  if (alpha != 1.0) throw InvalidInput("wasserstein_1d: only alpha = 1 is supported");
  struct Jump {
    double x;
    double dw;
  };
  std::vector<Jump> jumps;
  jumps.reserve(a.size() + b.size());
  for (std::size_t i = 0; i < a.size(); ++i) jumps.push_back({a.coords()[i], a.weight(i)});
  for (std::size_t j = 0; j < b.size(); ++j) jumps.push_back({b.coords()[j], -b.weight(j)});
  std::sort(jumps.begin(), jumps.end(), [](const Jump& p, const Jump& q) { return p.x < q.x; });
  double diff = 0.0, area = 0.0;
  for (std::size_t k = 0; k + 1 < jumps.size(); ++k) {
    diff += jumps[k].dw;
    area += std::abs(diff) * (jumps[k + 1].x - jumps[k].x);
  }
  return area;
}

double tv_distance_on_support(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.dimension() != b.dimension() || a.size() != b.size())
    throw InvalidInput("tv_distance_on_support: supports differ");
  const std::size_t d = a.dimension();
  detail::CellIndex index(d, a.size());
  std::vector<std::int64_t> key(d);
  auto key_of = [&](std::span<const double> p) {
    for (std::size_t c = 0; c < d; ++c) key[c] = std::bit_cast<std::int64_t>(p[c] + 0.0);
  };
  for (std::size_t i = 0; i < a.size(); ++i) {
    key_of(a.point(i));
    index.insert(key);
  }
  std::vector<double> bw(a.size(), 0.0);
  for (std::size_t j = 0; j < b.size(); ++j) {
    key_of(b.point(j));
    const std::uint32_t id = index.insert(key);
    if (id >= a.size()) throw InvalidInput("tv_distance_on_support: supports differ");
    bw[id] = b.weight(j);
  }
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a.weight(i) - bw[i]);
  return tv;
}

// Hierarchical partial-matching coupling.
namespace {

struct Atoms {
  std::vector<double> x;
  std::vector<double> w;
  std::size_t size() const noexcept { return w.size(); }
  void push(const double* p, std::size_t d, double mass) {
    x.insert(x.end(), p, p + d);
    w.push_back(mass);
  }
};

// Collapses atoms to weighted centroids on a grid of edge h anchored at the
// origin; returns the exact cost of that move.
double merge_on_grid(std::size_t d, Atoms& atoms, double h, double alpha) {
  detail::CellIndex index(d, atoms.size());
  std::vector<std::int64_t> key(d);
  std::vector<std::uint32_t> cell(atoms.size());
  Atoms merged;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t c = 0; c < d; ++c) key[c] = static_cast<std::int64_t>(std::floor(atoms.x[i * d + c] / h));
    cell[i] = index.insert(key);
    if (cell[i] == merged.size()) {
      merged.w.push_back(0.0);
      merged.x.resize(merged.x.size() + d, 0.0);
    }
    merged.w[cell[i]] += atoms.w[i];
    for (std::size_t c = 0; c < d; ++c) merged.x[cell[i] * d + c] += atoms.w[i] * atoms.x[i * d + c];
  }
  for (std::size_t k = 0; k < merged.size(); ++k)
    for (std::size_t c = 0; c < d; ++c) merged.x[k * d + c] /= merged.w[k];
  double moved = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i)
    moved += atoms.w[i] * pair_cost(atoms.x.data() + i * d, merged.x.data() + cell[i] * d, d, alpha);
  atoms = std::move(merged);
  return moved;
}

double reduce_to(std::size_t d, Atoms& atoms, std::size_t limit, double cell, double alpha) {
  if (atoms.size() <= limit) return 0.0;
  const int k = std::max(0, static_cast<int>(std::floor(std::log2(static_cast<double>(limit)) /
                                                         static_cast<double>(d))));
  double h = cell / std::ldexp(1.0, k);
  double moved = 0.0;
  while (atoms.size() > limit) {
    moved += merge_on_grid(d, atoms, h, alpha);
    h *= 2.0;
  }
  return moved;
}

// One source atom against several sinks: filling the nearest sinks first is
// optimal.
double single_source(std::size_t d, const double* src, double& supply, Atoms& sinks,
                     std::vector<double>& sink_left, double alpha) {
  std::vector<std::size_t> order(sinks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> dist(sinks.size());
  for (std::size_t j = 0; j < sinks.size(); ++j)
    dist[j] = pair_cost(src, sinks.x.data() + j * d, d, alpha);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t p, std::size_t q) { return dist[p] < dist[q]; });
  double total = 0.0;
  sink_left = sinks.w;
  for (std::size_t j : order) {
    if (supply <= 0.0) break;
    const double m = std::min(supply, sink_left[j]);
    total += m * dist[j];
    supply -= m;
    sink_left[j] -= m;
  }
  return total;
}

// Matches min(mass A, mass B) optimally; unmatched mass stays on its atoms.
double partial_match(std::size_t d, Atoms& A, Atoms& B, double alpha, Atoms& restA, Atoms& restB) {
  double total = 0.0;
  if (A.size() == 1) {
    double supply = A.w[0];
    std::vector<double> left;
    total = single_source(d, A.x.data(), supply, B, left, alpha);
    if (supply > 0.0) restA.push(A.x.data(), d, supply);
    for (std::size_t j = 0; j < B.size(); ++j)
      if (left[j] > 0.0) restB.push(B.x.data() + j * d, d, left[j]);
    return total;
  }
  if (B.size() == 1) return partial_match(d, B, A, alpha, restB, restA);

  const double wa = std::accumulate(A.w.begin(), A.w.end(), 0.0);
  const double wb = std::accumulate(B.w.begin(), B.w.end(), 0.0);
  std::vector<double> supply = A.w, demand = B.w;
  const bool dummy_col = wa > wb, dummy_row = wb > wa;
  if (dummy_col) demand.push_back(wa - wb);
  if (dummy_row) supply.push_back(wb - wa);
  const std::size_t n = supply.size(), m = demand.size();
  std::vector<double> c(n * m, 0.0);
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = 0; j < B.size(); ++j)
      c[i * m + j] = pair_cost(A.x.data() + i * d, B.x.data() + j * d, d, alpha);
  const auto sol = detail::solve_transport(supply, demand, c);
  std::vector<double> usedA(A.size(), 0.0), usedB(B.size(), 0.0);
  for (const auto& f : sol.flows) {
    if (f.row >= A.size() || f.col >= B.size()) continue;
    usedA[f.row] += f.mass;
    usedB[f.col] += f.mass;
    total += f.mass * c[f.row * m + f.col];
  }
  for (std::size_t i = 0; i < A.size(); ++i) {
    const double left = A.w[i] - usedA[i];
    if (left > 0.0) restA.push(A.x.data() + i * d, d, left);
  }
  for (std::size_t j = 0; j < B.size(); ++j) {
    const double left = B.w[j] - usedB[j];
    if (left > 0.0) restB.push(B.x.data() + j * d, d, left);
  }
  return total;
}

// Drops residual masses that are pure rounding noise.
void drop_dust(Atoms& atoms, std::size_t d, double floor) {
  Atoms kept;
  for (std::size_t i = 0; i < atoms.size(); ++i)
    if (atoms.w[i] > floor) kept.push(atoms.x.data() + i * d, d, atoms.w[i]);
  atoms = std::move(kept);
}

}  // namespace

double hierarchical_coupling_cost(const DiscreteMeasure& a, const DiscreteMeasure& b,
                                  const GroundCost& cost, const IntervalOptions& options) {
  cost.validate();
  check_pair(a, b, "hierarchical_coupling_cost");
  const std::size_t d = a.dimension();
  BoundingBox box = a.bounds();
  const BoundingBox bb = b.bounds();
  for (std::size_t c = 0; c < d; ++c) {
    box.lower[c] = std::min(box.lower[c], bb.lower[c]);
    box.upper[c] = std::max(box.upper[c], bb.upper[c]);
  }
  const double diagonal = box.diagonal();
  if (diagonal == 0.0) return 0.0;
  double h0 = options.resolution > 0.0 ? options.resolution : 1e-4 * diagonal;
  std::vector<double> anchor(d);
  for (std::size_t c = 0; c < d; ++c) anchor[c] = h0 * std::floor(box.lower[c] / h0);

  Atoms A{{a.coords().begin(), a.coords().end()}, {a.weights().begin(), a.weights().end()}};
  Atoms B{{b.coords().begin(), b.coords().end()}, {b.weights().begin(), b.weights().end()}};
  const double dust = 1e-15;
  const std::size_t limit = std::max<std::size_t>(options.cell_atoms, 1);
  double total = 0.0;

  for (double s = h0;; s *= 2.0) {
    if (A.size() == 0 || B.size() == 0) {
      // Only rounding dust can be left on one side.
      const Atoms& rest = A.size() ? A : B;
      total += std::accumulate(rest.w.begin(), rest.w.end(), 0.0) *
               std::pow(diagonal, cost.alpha);
      break;
    }
    detail::CellIndex index(d, A.size() + B.size());
    std::vector<std::int64_t> key(d);
    auto cell_of = [&](const double* p) {
      for (std::size_t c = 0; c < d; ++c)
        key[c] = static_cast<std::int64_t>(std::floor((p[c] - anchor[c]) / s));
      return index.insert(key);
    };
    std::vector<std::uint32_t> ca(A.size()), cb(B.size());
    for (std::size_t i = 0; i < A.size(); ++i) ca[i] = cell_of(A.x.data() + i * d);
    for (std::size_t j = 0; j < B.size(); ++j) cb[j] = cell_of(B.x.data() + j * d);
    const std::size_t cells = index.size();

    // Bucket atoms by cell (counting sort keeps input order inside a cell).
    std::vector<std::size_t> startA(cells + 1, 0), startB(cells + 1, 0);
    for (auto id : ca) ++startA[id + 1];
    for (auto id : cb) ++startB[id + 1];
    std::partial_sum(startA.begin(), startA.end(), startA.begin());
    std::partial_sum(startB.begin(), startB.end(), startB.begin());
    std::vector<std::size_t> byA(A.size()), byB(B.size());
    {
      std::vector<std::size_t> fa(startA.begin(), startA.end() - 1), fb(startB.begin(), startB.end() - 1);
      for (std::size_t i = 0; i < A.size(); ++i) byA[fa[ca[i]]++] = i;
      for (std::size_t j = 0; j < B.size(); ++j) byB[fb[cb[j]]++] = j;
    }

    Atoms nextA, nextB;
    for (std::size_t id = 0; id < cells; ++id) {
      const std::size_t na = startA[id + 1] - startA[id], nb = startB[id + 1] - startB[id];
      if (na == 0 || nb == 0) {
        for (std::size_t k = startA[id]; k < startA[id + 1]; ++k)
          nextA.push(A.x.data() + byA[k] * d, d, A.w[byA[k]]);
        for (std::size_t k = startB[id]; k < startB[id + 1]; ++k)
          nextB.push(B.x.data() + byB[k] * d, d, B.w[byB[k]]);
        continue;
      }
      Atoms ga, gb;
      for (std::size_t k = startA[id]; k < startA[id + 1]; ++k) ga.push(A.x.data() + byA[k] * d, d, A.w[byA[k]]);
      for (std::size_t k = startB[id]; k < startB[id + 1]; ++k) gb.push(B.x.data() + byB[k] * d, d, B.w[byB[k]]);
      total += reduce_to(d, ga, limit, s, cost.alpha);
      total += reduce_to(d, gb, limit, s, cost.alpha);
      total += partial_match(d, ga, gb, cost.alpha, nextA, nextB);
    }
    drop_dust(nextA, d, dust);
    drop_dust(nextB, d, dust);
    A = std::move(nextA);
    B = std::move(nextB);
    if (A.size() == 0 && B.size() == 0) break;
  }
  return total;
}

DistanceInterval wasserstein_interval(const DiscreteMeasure& a, const DiscreteMeasure& b,
                                      const GroundCost& cost, const IntervalOptions& options) {
  cost.validate();
  check_pair(a, b, "wasserstein_interval");
  if (a.size() + b.size() <= options.exact_atoms) {
    const double w = wasserstein_exact(a, b, cost, {options.exact_atoms, 1e-7}).distance;
    return {w, w, true};
  }
  DistanceInterval out;
  out.upper = hierarchical_coupling_cost(a, b, cost, options);
  if (cost.alpha == 1.0) {
    const auto ma = a.mean(), mb = b.mean();
    double s = 0.0;
    for (std::size_t c = 0; c < ma.size(); ++c) s += (ma[c] - mb[c]) * (ma[c] - mb[c]);
    out.lower = std::sqrt(s);
  }

  // Coarsen both to the atom budget on a shared grid and solve exactly.
  BoundingBox box = a.bounds();
  const BoundingBox bb = b.bounds();
  for (std::size_t c = 0; c < box.lower.size(); ++c) {
    box.lower[c] = std::min(box.lower[c], bb.lower[c]);
    box.upper[c] = std::max(box.upper[c], bb.upper[c]);
  }
  const std::size_t d = a.dimension();
  const std::size_t budget = std::max<std::size_t>(options.coarse_atoms, 1);
  auto coarsen = [&](const DiscreteMeasure& m, double& moved) {
    Atoms atoms{{m.coords().begin(), m.coords().end()}, {m.weights().begin(), m.weights().end()}};
    moved = 0.0;
    double h = box.diagonal() / 4096.0;
    while (atoms.size() > budget) {
      Atoms trial = atoms;
      const double c = merge_on_grid(d, trial, h, cost.alpha);
      if (trial.size() <= budget) {
        moved += c;
        atoms = std::move(trial);
      }
      h *= 2.0;
    }
    return DiscreteMeasure(unchecked, d, std::move(atoms.x), std::move(atoms.w));
  };
  double ea = 0.0, eb = 0.0;
  const DiscreteMeasure ca = coarsen(a, ea), cb = coarsen(b, eb);
  const double coarse = wasserstein_exact(ca, cb, cost, {ca.size() + cb.size(), 1e-7}).distance;
  out.lower = std::max(out.lower, coarse - ea - eb);
  out.upper = std::min(out.upper, coarse + ea + eb);
  out.lower = std::min(out.lower, out.upper);
  return out;
}

}  // namespace pwifs
