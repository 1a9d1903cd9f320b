// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "pwifs/error.hpp"
#include "pwifs/rng.hpp"
#include "pwifs/transport.hpp"

using namespace pwifs;

namespace {

DiscreteMeasure random_measure(RandomStream& rng, std::size_t d, std::size_t atoms, double shift = 0.0) {
  std::vector<double> coords, weights;
  for (std::size_t i = 0; i < atoms * d; ++i) coords.push_back(rng.uniform() + shift);
  for (std::size_t i = 0; i < atoms; ++i) weights.push_back(0.05 + rng.uniform());
  return DiscreteMeasure::normalized(d, coords, weights);
}

std::vector<double> column(const DiscreteMeasure& m) {
  return std::vector<double>(m.coords().begin(), m.coords().end());
}
std::vector<double> weights(const DiscreteMeasure& m) {
  return std::vector<double>(m.weights().begin(), m.weights().end());
}

}  // namespace

TEST_CASE("exact transport on point masses and identical measures") {
  const auto x = DiscreteMeasure::dirac(std::vector{0.0, 0.0});
  const auto y = DiscreteMeasure::dirac(std::vector{3.0, 4.0});
  CHECK(wasserstein_exact(x, y).distance == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(wasserstein_exact(x, y, GroundCost{0.5}).distance == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
  RandomStream rng(1);
  const auto a = random_measure(rng, 2, 50);
  CHECK(std::abs(wasserstein_exact(a, a).distance) < 1e-12);
}

TEST_CASE("half-half against the midpoint is one half") {
  const DiscreteMeasure a(1, {0.0, 1.0}, {0.5, 0.5});
  const auto b = DiscreteMeasure::dirac(std::vector{0.5});
  CHECK(std::abs(wasserstein_exact(a, b).distance - 0.5) < 1e-12);
  CHECK(std::abs(wasserstein_1d(a, b) - 0.5) < 1e-15);
  CHECK(std::abs(oracle::cdf_distance({0.0, 1.0}, {0.5, 0.5}, {0.5}, {1.0}) - 0.5) < 1e-15);
}

TEST_CASE("wasserstein_1d basics and errors") {
  const auto zero = DiscreteMeasure::dirac(std::vector{0.0});
  const auto one = DiscreteMeasure::dirac(std::vector{1.0});
  CHECK(wasserstein_1d(zero, one) == 1.0);
  CHECK(wasserstein_1d(one, one) == 0.0);
  const auto plane = DiscreteMeasure::dirac(std::vector{0.0, 0.0});
  CHECK_THROWS_AS(wasserstein_1d(plane, plane), InvalidInput);
}

TEST_CASE("transport plan is feasible and certified") {
  RandomStream rng(12);
  const auto a = random_measure(rng, 2, 40);
  const auto b = random_measure(rng, 2, 60);
  const ExactTransport t = wasserstein_exact(a, b);
  std::vector<double> rows(a.size(), 0.0), cols(b.size(), 0.0);
  double objective = 0.0;
  for (const auto& e : t.plan.entries) {
    CHECK(e.mass >= 0.0);
    rows[e.row] += e.mass;
    cols[e.col] += e.mass;
    objective += e.mass * GroundCost{}(a.point(e.row), b.point(e.col));
  }
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(rows[i] - a.weight(i)) < 1e-9);
  for (std::size_t j = 0; j < b.size(); ++j) CHECK(std::abs(cols[j] - b.weight(j)) < 1e-9);
  CHECK(std::abs(objective - t.distance) < 1e-12);
  CHECK(t.certificate.passed);
  CHECK(std::abs(t.certificate.duality_gap) < 1e-9);
}

TEST_CASE("exact transport errors") {
  const auto p = DiscreteMeasure::dirac(std::vector{0.0});
  const auto q = DiscreteMeasure::dirac(std::vector{0.0, 1.0});
  CHECK_THROWS_AS(wasserstein_exact(p, q), InvalidInput);
  RandomStream rng(2);
  const auto big = random_measure(rng, 1, 1200);
  CHECK_THROWS_AS(wasserstein_exact(big, big), SizeError);
  CHECK_THROWS_AS(wasserstein_exact(p, p, GroundCost{1.5}), InvalidInput);
  CHECK_THROWS_AS(wasserstein_exact(p, p, GroundCost{0.0}), InvalidInput);
  const DiscreteMeasure light(unchecked, 1, {0.0}, {0.5});
  CHECK_THROWS_AS(wasserstein_exact(light, p), InvalidInput);
}

TEST_CASE("exact transport matches the CDF oracle on the line") {
  RandomStream rng(100);
  for (int t = 0; t < 100; ++t) {
    const auto a = random_measure(rng, 1, 1 + rng.below(100));
    const auto b = random_measure(rng, 1, 1 + rng.below(100), 0.3);
    const double expected = oracle::cdf_distance(column(a), weights(a), column(b), weights(b));
    CHECK(std::abs(wasserstein_exact(a, b).distance - expected) < 1e-8);
    CHECK(std::abs(wasserstein_1d(a, b) - expected) < 1e-8);
  }
}

TEST_CASE("exact transport matches vertex enumeration on tiny instances") {
  RandomStream rng(7);
  for (int t = 0; t < 60; ++t) {
    const GroundCost cost{t % 2 == 0 ? 1.0 : 0.3 + 0.7 * rng.uniform()};
    const auto a = random_measure(rng, 2, 1 + rng.below(4));
    const auto b = random_measure(rng, 2, 1 + rng.below(4));
    std::vector<std::vector<double>> c(a.size(), std::vector<double>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) c[i][j] = cost(a.point(i), b.point(j));
    const double expected = oracle::transport_by_vertices(weights(a), weights(b), c);
    CHECK(std::abs(wasserstein_exact(a, b, cost).distance - expected) < 1e-9);
  }
}

TEST_CASE("property: exact transport is a metric") {
  RandomStream rng(44);
  for (int t = 0; t < 40; ++t) {
    const auto a = random_measure(rng, 2, 20), b = random_measure(rng, 2, 25), c = random_measure(rng, 2, 15);
    const double ab = wasserstein_exact(a, b).distance, ba = wasserstein_exact(b, a).distance;
    CHECK(std::abs(ab - ba) < 1e-7);
    CHECK(ab <= wasserstein_exact(a, c).distance + wasserstein_exact(c, b).distance + 1e-7);
  }
}

TEST_CASE("property: W1 scales with the coordinates") {
  RandomStream rng(45);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_measure(rng, 2, 30), b = random_measure(rng, 2, 30);
    auto scaled = [](const DiscreteMeasure& m) {
      std::vector<double> c(m.coords().begin(), m.coords().end());
      for (double& x : c) x *= 2.0;
      return DiscreteMeasure(2, c, std::vector<double>(m.weights().begin(), m.weights().end()));
    };
    CHECK(std::abs(wasserstein_exact(scaled(a), scaled(b)).distance - 2.0 * wasserstein_exact(a, b).distance) < 1e-9);
  }
}

TEST_CASE("sinkhorn on point masses and identical measures") {
  const auto x = DiscreteMeasure::dirac(std::vector{0.0, 0.0});
  const auto y = DiscreteMeasure::dirac(std::vector{1.0, 1.0});
  const double d = std::sqrt(2.0);
  const SinkhornResult s = sinkhorn(x, y, {}, 0.01 * d, 1000);
  CHECK(std::abs(s.distance - d) <= 0.01 * d);
  RandomStream rng(3);
  const auto a = random_measure(rng, 2, 50);
  const SinkhornResult same = sinkhorn(a, a);
  CHECK(same.distance <= same.error_bound + 1e-12);
  CHECK(same.lower <= 1e-12);
  CHECK_THROWS_AS(sinkhorn(x, y, {}, -1.0, 10), InvalidInput);
}

TEST_CASE("sinkhorn brackets the exact value") {
  RandomStream rng(9);
  for (int t = 0; t < 5; ++t) {
    const auto a = random_measure(rng, 2, 200), b = random_measure(rng, 2, 200, 0.1);
    const double exact = wasserstein_exact(a, b).distance;
    const SinkhornResult s = sinkhorn(a, b);
    CHECK(s.lower <= exact + 1e-9);
    CHECK(exact <= s.upper + 1e-9);
    CHECK(std::abs(s.distance - exact) <= s.error_bound + 1e-9);
    CHECK(std::abs(s.distance - exact) <= 0.01 * exact);
  }
}

TEST_CASE("sinkhorn reports running out of iterations") {
  RandomStream rng(10);
  const auto a = random_measure(rng, 2, 100), b = random_measure(rng, 2, 100);
  CHECK_THROWS_AS(sinkhorn(a, b, {}, 1e-4, 3), ConvergenceFailure);
}

TEST_CASE("tv distance on a shared support") {
  const DiscreteMeasure a(1, {0.0, 1.0}, {0.25, 0.75});
  const DiscreteMeasure b(1, {1.0, 0.0}, {0.5, 0.5});
  CHECK(std::abs(tv_distance_on_support(a, b) - 0.5) < 1e-15);
  CHECK_THROWS_AS(tv_distance_on_support(a, DiscreteMeasure::dirac(std::vector{0.0})), InvalidInput);
}

TEST_CASE("interval encloses the exact distance") {
  RandomStream rng(13);
  for (int t = 0; t < 5; ++t) {
    const auto a = random_measure(rng, 2, 900), b = random_measure(rng, 2, 900, 0.05);
    const double exact = wasserstein_exact(a, b).distance;
    IntervalOptions small;
    small.exact_atoms = 100;
    const DistanceInterval iv = wasserstein_interval(a, b, {}, small);
    CHECK_FALSE(iv.exact);
    CHECK(iv.lower <= exact + 1e-12);
    CHECK(exact <= iv.upper + 1e-12);
    CHECK(exact <= hierarchical_coupling_cost(a, b, {}, small) + 1e-12);
  }
  const auto a = random_measure(rng, 2, 10), b = random_measure(rng, 2, 10);
  const DistanceInterval tight = wasserstein_interval(a, b);
  CHECK(tight.exact);
  CHECK(tight.lower == tight.upper);
}
