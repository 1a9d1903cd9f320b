// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0
//
// Sinkhorn with epsilon scaling and absorbed (log-stabilised) scaling
// vectors, debiased. The reported interval comes from two independent
// certificates: a feasible plan (rounded Sinkhorn plan) for the upper end
// and c-transformed dual potentials for the lower end.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pwifs/error.hpp"
#include "pwifs/transport.hpp"

namespace pwifs {
namespace {

using Vec = std::vector<double>;

Vec costs(const DiscreteMeasure& a, const DiscreteMeasure& b, const GroundCost& cost) {
  Vec c(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i * b.size() + j] = cost(a.point(i), b.point(j));
  return c;
}

Vec logs(std::span<const double> w) {
  Vec out(w.size());
  std::transform(w.begin(), w.end(), out.begin(), [](double v) { return std::log(v); });
  return out;
}

// Soft c-transform. C is row-major n x m; over_rows reduces over i:
// out_j = -eps * log sum_i exp(log_w_i + (pot_i - C_ij) / eps).
void soft_min(const Vec& C, std::size_t n, std::size_t m, bool over_rows, const Vec& log_w,
              const Vec& pot, double eps, Vec& out, Vec& scratch) {
  const std::size_t outer = over_rows ? m : n, inner = over_rows ? n : m;
  scratch.resize(inner);
  for (std::size_t o = 0; o < outer; ++o) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < inner; ++k) {
      const double c = over_rows ? C[k * m + o] : C[o * m + k];
      scratch[k] = log_w[k] + (pot[k] - c) / eps;
      hi = std::max(hi, scratch[k]);
    }
    double s = 0.0;
    for (std::size_t k = 0; k < inner; ++k) s += std::exp(scratch[k] - hi);
    out[o] = -eps * (hi + std::log(s));
  }
}

struct Solve {
  Vec f, g;
  double violation = 0.0;
  std::size_t iterations = 0;
};

// Scaling factors are folded back into the potentials once they leave
// [1/kAbsorb, kAbsorb].
constexpr double kAbsorb = 1e50;
// Kernel entries below this are stored as zero; they would otherwise run as
// subnormals. Against scaling factors of at most kAbsorb the dropped terms
// are below 1e-150.
constexpr double kFlush = 1e-200;
// Over-relaxation weight for the final stage of the a-b problem; the stage
// drops back to plain updates if the violation grows between checks.
// Earlier stages use plain updates.
constexpr double kOverRelax = 1.8;

bool out_of_range(const Vec& u) {
  return std::any_of(u.begin(), u.end(),
                     [](double x) { return !(x < kAbsorb && x > 1.0 / kAbsorb); });
}

// K_ij = a_i b_j exp((f_i + g_j - C_ij) / eps).
void build_kernel(const Vec& C, std::span<const double> a, std::span<const double> b, const Vec& f,
                  const Vec& g, double eps, Vec& K) {
  const std::size_t n = a.size(), m = b.size();
  K.resize(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
    {
      const double k = a[i] * b[j] * std::exp((f[i] + g[j] - C[i * m + j]) / eps);
      K[i * m + j] = k < kFlush ? 0.0 : k;
    }
}

void absorb(Vec& pot, Vec& scale, double eps) {
  for (std::size_t i = 0; i < pot.size(); ++i) {
    pot[i] += eps * std::log(scale[i]);
    scale[i] = 1.0;
  }
}

// Kv and K^T u for row-major K (n x m).
void times(const Vec& K, std::size_t n, std::size_t m, const Vec& v, Vec& out) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += K[i * m + j] * v[j];
    out[i] = s;
  }
}
void times_transposed(const Vec& K, std::size_t n, std::size_t m, const Vec& u, Vec& out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[j] += K[i * m + j] * u[i];
}

bool positive_finite(const Vec& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return v > 0.0 && std::isfinite(v); });
}

// Alternating updates with epsilon halving from the cost scale down to eps,
// in stabilised scaling form: the potentials carry the bulk, u and v the
// recent change, and the log-domain update takes over when a kernel row or
// column underflows.
Solve solve(const Vec& C, std::span<const double> a, std::span<const double> b, double eps,
            double tolerance, std::size_t max_iter, std::size_t& budget_used) {
  const std::size_t n = a.size(), m = b.size();
  const Vec la = logs(a), lb = logs(b);
  Solve s{Vec(n, 0.0), Vec(m, 0.0)};
  Vec K, u(n, 1.0), v(m, 1.0), Kv(n), Ktu(m), scratch;
  const double top = std::max(*std::max_element(C.begin(), C.end()), eps);
  for (double e = top;; e = std::max(e * 0.5, eps)) {
    const bool last = e == eps;
    const double stage_tol = last ? tolerance : std::max(tolerance, 1e-3);
    build_kernel(C, a, b, s.f, s.g, e, K);
    double omega = last ? kOverRelax : 1.0, previous = std::numeric_limits<double>::infinity();
    auto relax = [&omega](double old, double target) {
      return omega == 1.0 ? target : std::pow(old, 1.0 - omega) * std::pow(target, omega);
    };
    for (;;) {
      times_transposed(K, n, m, u, Ktu);
      bool fallback = !positive_finite(Ktu);
      if (!fallback) {
        for (std::size_t j = 0; j < m; ++j) v[j] = relax(v[j], b[j] / Ktu[j]);
        times(K, n, m, v, Kv);
        fallback = !positive_finite(Kv);
        if (!fallback)
          for (std::size_t i = 0; i < n; ++i) u[i] = relax(u[i], a[i] / Kv[i]);
      }
      if (fallback) {
        absorb(s.f, u, e);
        std::fill(v.begin(), v.end(), 1.0);
        soft_min(C, n, m, true, la, s.f, e, s.g, scratch);
        soft_min(C, n, m, false, lb, s.g, e, s.f, scratch);
        build_kernel(C, a, b, s.f, s.g, e, K);
      } else if (out_of_range(u) || out_of_range(v)) {
        absorb(s.f, u, e);
        absorb(s.g, v, e);
        build_kernel(C, a, b, s.f, s.g, e, K);
      }
      ++s.iterations;
      ++budget_used;
      if (s.iterations % 10 == 0 || budget_used >= max_iter) {
        times_transposed(K, n, m, u, Ktu);
        s.violation = 0.0;
        for (std::size_t j = 0; j < m; ++j) s.violation += std::abs(v[j] * Ktu[j] - b[j]);
        if (s.violation <= stage_tol) break;
        if (s.violation > previous) omega = 1.0;
        previous = s.violation;
        if (budget_used >= max_iter) {
          absorb(s.f, u, e);
          absorb(s.g, v, e);
          throw ConvergenceFailure("sinkhorn: marginal violation " + std::to_string(s.violation) +
                                       " after " + std::to_string(budget_used) + " iterations",
                                   s.violation);
        }
      }
    }
    absorb(s.f, u, e);
    absorb(s.g, v, e);
    if (last) return s;
  }
}

// Symmetric problem OT_eps(a, a) via the averaged fixed-point update
// f <- (f + T f) / 2, in the same stabilised form (u <- sqrt(u / K u)).
double self_value(const Vec& C, std::span<const double> a, double eps, double tolerance,
                  std::size_t max_iter, std::size_t& budget_used) {
  const std::size_t n = a.size();
  const Vec la = logs(a);
  Vec f(n, 0.0), t(n), u(n, 1.0), Ku(n), K, scratch;
  const double top = std::max(*std::max_element(C.begin(), C.end()), eps);
  for (double e = top;; e = std::max(e * 0.5, eps)) {
    const bool last = e == eps;
    // K_ik = a_k exp((f_i + f_k - C_ik) / e); a_i is not part of the update.
    auto rebuild = [&] {
      build_kernel(C, std::vector<double>(n, 1.0), a, f, f, e, K);
    };
    rebuild();
    for (;;) {
      times(K, n, n, u, Ku);
      double change = 0.0;
      if (positive_finite(Ku)) {
        for (std::size_t i = 0; i < n; ++i) {
          const double next = std::sqrt(u[i] / Ku[i]);
          change = std::max(change, e * std::abs(std::log(next / u[i])));
          u[i] = next;
        }
        if (out_of_range(u)) {
          absorb(f, u, e);
          rebuild();
        }
      } else {
        absorb(f, u, e);
        soft_min(C, n, n, false, la, f, e, t, scratch);
        for (std::size_t i = 0; i < n; ++i) {
          const double next = 0.5 * (f[i] + t[i]);
          change = std::max(change, std::abs(next - f[i]));
          f[i] = next;
        }
        rebuild();
      }
      ++budget_used;
      if (change <= (last ? tolerance : 1e-3) * top) break;
      if (budget_used >= max_iter)
        throw ConvergenceFailure("sinkhorn: symmetric potential did not settle", change);
    }
    absorb(f, u, e);
    if (last) break;
  }
  return 2.0 * std::inner_product(a.begin(), a.end(), f.begin(), 0.0);
}

// Altschuler-Weed-Rigollet rounding onto the transport polytope.
double rounded_plan_cost(const Vec& C, std::span<const double> a, std::span<const double> b,
                         const Vec& f, const Vec& g, double eps) {
  const std::size_t n = a.size(), m = b.size();
  Vec P(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      P[i * m + j] = a[i] * b[j] * std::exp((f[i] + g[j] - C[i * m + j]) / eps);
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < m; ++j) r += P[i * m + j];
    if (r > a[i])
      for (std::size_t j = 0; j < m; ++j) P[i * m + j] *= a[i] / r;
  }
  for (std::size_t j = 0; j < m; ++j) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c += P[i * m + j];
    if (c > b[j])
      for (std::size_t i = 0; i < n; ++i) P[i * m + j] *= b[j] / c;
  }
  Vec er(n), ec(m);
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < m; ++j) r += P[i * m + j];
    er[i] = std::max(a[i] - r, 0.0);
  }
  for (std::size_t j = 0; j < m; ++j) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c += P[i * m + j];
    ec[j] = std::max(b[j] - c, 0.0);
  }
  const double mass = std::accumulate(er.begin(), er.end(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double p = P[i * m + j];
      if (mass > 0.0) p += er[i] * ec[j] / mass;
      total += p * C[i * m + j];
    }
  return total;
}

// Dual value of (f^cc, f^c), a valid lower bound for any f.
double c_transform_bound(const Vec& C, std::span<const double> a, std::span<const double> b,
                         const Vec& f) {
  const std::size_t n = a.size(), m = b.size();
  Vec g(m, std::numeric_limits<double>::infinity()), h(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) g[j] = std::min(g[j], C[i * m + j] - f[i]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) h[i] = std::min(h[i], C[i * m + j] - g[j]);
  return std::inner_product(a.begin(), a.end(), h.begin(), 0.0) +
         std::inner_product(b.begin(), b.end(), g.begin(), 0.0);
}

}  // namespace

double auto_epsilon(const DiscreteMeasure& a, const DiscreteMeasure& b, const GroundCost& cost) {
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) mean += a.weight(i) * b.weight(j) * cost(a.point(i), b.point(j));
  return mean > 0.0 ? 1e-3 * mean : 1e-12;
}

SinkhornResult sinkhorn(const DiscreteMeasure& a, const DiscreteMeasure& b, const GroundCost& cost,
                        const SinkhornOptions& options) {
  cost.validate();
  if (a.dimension() != b.dimension()) throw InvalidInput("sinkhorn: dimensions differ");
  if (options.epsilon < 0.0 || !std::isfinite(options.epsilon))
    throw InvalidInput("sinkhorn: epsilon must be positive");
  const double eps = options.epsilon > 0.0 ? options.epsilon : auto_epsilon(a, b, cost);

  SinkhornResult out;
  out.epsilon = eps;
  const Vec Cab = costs(a, b, cost);
  std::size_t used = 0;
  const Solve ab = solve(Cab, a.weights(), b.weights(), eps, options.tolerance, options.max_iter, used);
  const double ot_ab = std::inner_product(a.weights().begin(), a.weights().end(), ab.f.begin(), 0.0) +
                       std::inner_product(b.weights().begin(), b.weights().end(), ab.g.begin(), 0.0);
  const double ot_aa = self_value(costs(a, a, cost), a.weights(), eps, options.tolerance, options.max_iter, used);
  const double ot_bb = self_value(costs(b, b, cost), b.weights(), eps, options.tolerance, options.max_iter, used);

  out.distance = std::max(ot_ab - 0.5 * (ot_aa + ot_bb), 0.0);
  out.iterations = used;
  out.marginal_violation = ab.violation;
  out.upper = rounded_plan_cost(Cab, a.weights(), b.weights(), ab.f, ab.g, eps);
  out.lower = std::max(c_transform_bound(Cab, a.weights(), b.weights(), ab.f), 0.0);
  out.error_bound = std::max(std::abs(out.distance - out.lower), std::abs(out.upper - out.distance));
  return out;
}

SinkhornResult sinkhorn(const DiscreteMeasure& a, const DiscreteMeasure& b, const GroundCost& cost,
                        double epsilon, std::size_t max_iter) {
  if (!(epsilon > 0.0)) throw InvalidInput("sinkhorn: epsilon must be positive");
  SinkhornOptions options;
  options.epsilon = epsilon;
  options.max_iter = max_iter;
  return sinkhorn(a, b, cost, options);
}

}  // namespace pwifs
