// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "pwifs/bounds.hpp"
#include "pwifs/discrete_measure.hpp"
#include "pwifs/error.hpp"
#include "pwifs/invariant.hpp"
#include "pwifs/particles.hpp"
#include "pwifs/rng.hpp"
#include "pwifs/transport.hpp"

using namespace pwifs;

namespace {

const SamplingMeasure mu0({0.23, 0.22, 0.22, 0.33});

MapFamily line_map(double a, double b) {
  return MapFamily{AffineMap::from_row_major(std::vector{a}, std::vector{b})};
}

DiscreteMeasure random_measure(RandomStream& rng, std::size_t atoms, double spread) {
  std::vector<double> coords, weights;
  for (std::size_t i = 0; i < atoms; ++i) {
    coords.push_back(spread * (2 * rng.uniform() - 1));
    coords.push_back(spread * (2 * rng.uniform() - 1));
    weights.push_back(0.1 + rng.uniform());
  }
  return DiscreteMeasure::normalized(2, coords, weights);
}

double mass(const DiscreteMeasure& m) {
  return std::accumulate(m.weights().begin(), m.weights().end(), 0.0);
}

}  // namespace

TEST_CASE("discrete measures validate and merge duplicates") {
  CHECK_THROWS_AS(DiscreteMeasure(2, {0, 0, 1, 1}, {0.5, 0.6}), InvalidInput);
  CHECK_THROWS_AS(DiscreteMeasure(2, {0, 0, 1}, {1.0}), InvalidInput);
  CHECK_THROWS_AS(DiscreteMeasure(1, {NAN}, {1.0}), InvalidInput);
  CHECK_THROWS_AS(DiscreteMeasure(1, {0.0, 1.0}, {-0.5, 1.5}), InvalidInput);
  const DiscreteMeasure m(1, {2.0, 3.0, 2.0}, {0.25, 0.5, 0.25});
  REQUIRE(m.size() == 2);
  CHECK(m.point(0)[0] == 2.0);
  CHECK(m.weight(0) == 0.5);
  CHECK(m.point(1)[0] == 3.0);
  const DiscreteMeasure n = DiscreteMeasure::normalized(1, {0.0, 1.0}, {1.0, 3.0});
  CHECK(n.weight(1) == 0.75);
}

TEST_CASE("push_forward of a point mass") {
  const MapFamily fam = maple_leaf_family();
  const DiscreteMeasure out = push_forward(DiscreteMeasure::dirac(std::vector{0.0, 0.0}), fam, mu0);
  REQUIRE(out.size() == 4);
  for (std::size_t j = 0; j < 4; ++j) {
    const auto& f = std::get<AffineMap>(fam.maps()[j]);
    CHECK(out.point(j)[0] == f.offset()[0]);
    CHECK(out.point(j)[1] == f.offset()[1]);
    CHECK(out.weight(j) == mu0.weights()[j]);
  }
}

TEST_CASE("push_forward of two atoms under two maps") {
  const MapFamily fam{AffineMap::from_row_major(std::vector{0.5}, std::vector{0.0}),
                      AffineMap::from_row_major(std::vector{0.5}, std::vector{10.0})};
  const DiscreteMeasure nu(1, {0.0, 1.0}, {0.5, 0.5});
  const DiscreteMeasure out = push_forward(nu, fam, SamplingMeasure::uniform(2));
  REQUIRE(out.size() == 4);
  const std::vector<double> expected{0.0, 0.5, 10.0, 10.5};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(out.point(i)[0] == expected[i]);
    CHECK(out.weight(i) == 0.25);
  }
  CHECK_THROWS_AS(push_forward(nu, fam, SamplingMeasure::uniform(3)), InvalidInput);
  CHECK_THROWS_AS(push_forward(DiscreteMeasure::dirac(std::vector{0.0, 0.0}), fam, SamplingMeasure::uniform(2)),
                  InvalidInput);
}

TEST_CASE("property: push_forward conserves mass and stays in the absorbing ball") {
  RandomStream rng(8);
  const MapFamily fam = maple_leaf_family();
  const double radius = *absorbing_radius(fam);
  for (int t = 0; t < 50; ++t) {
    DiscreteMeasure nu = random_measure(rng, 1 + rng.below(30), radius / std::sqrt(2.0));
    for (int i = 0; i < 3; ++i) {
      nu = push_forward(nu, fam, mu0);
      CHECK(std::abs(mass(nu) - 1.0) < 1e-12);
      for (std::size_t a = 0; a < nu.size(); ++a)
        CHECK(std::hypot(nu.point(a)[0], nu.point(a)[1]) <= radius + 1e-9);
    }
  }
}

TEST_CASE("compress reports a valid W1 error bound") {
  RandomStream rng(21);
  for (int t = 0; t < 20; ++t) {
    const DiscreteMeasure nu = random_measure(rng, 300, 1.0);
    const Compressed c = compress(nu, {0.2, 40});
    CHECK(c.measure.size() <= 40);
    CHECK(std::abs(mass(c.measure) - 1.0) < 1e-12);
    const double w = wasserstein_exact(nu, c.measure).distance;
    CHECK(w <= c.error_bound() + 1e-12);
  }
  const DiscreteMeasure nu(1, {0.0, 1e-9}, {0.5, 0.5});
  const Compressed exact_only = compress(nu, {0.0, 0});
  CHECK(exact_only.measure.size() == 2);
  CHECK(exact_only.error_bound() == 0.0);
}

TEST_CASE("coarsen_to respects the budget") {
  RandomStream rng(4);
  const DiscreteMeasure nu = random_measure(rng, 2000, 1.0);
  const Compressed c = coarsen_to(nu, 100);
  CHECK(c.measure.size() <= 100);
  CHECK(wasserstein_interval(nu, c.measure).lower <= c.error_bound() + 1e-12);
}

TEST_CASE("cesaro_average") {
  const DiscreteMeasure x = DiscreteMeasure::dirac(std::vector{1.0, 2.0});
  const DiscreteMeasure y = DiscreteMeasure::dirac(std::vector{3.0, 4.0});
  const std::vector<DiscreteMeasure> one{x};
  const DiscreteMeasure same = cesaro_average(one);
  CHECK(same.size() == 1);
  CHECK(same.weight(0) == 1.0);
  const std::vector<DiscreteMeasure> two{x, y};
  const DiscreteMeasure avg = cesaro_average(two);
  REQUIRE(avg.size() == 2);
  CHECK(avg.weight(0) == 0.5);
  CHECK(avg.point(1)[0] == 3.0);
  CHECK_THROWS_AS(cesaro_average(std::span<const DiscreteMeasure>{}), InvalidInput);
  const std::vector<DiscreteMeasure> mixed{x, DiscreteMeasure::dirac(std::vector{1.0})};
  CHECK_THROWS_AS(cesaro_average(mixed), InvalidInput);
}

TEST_CASE("Cesaro averages of maple-leaf iterates settle down") {
  const MapFamily fam = maple_leaf_family();
  std::vector<DiscreteMeasure> iterates{DiscreteMeasure::dirac(std::vector{0.0, 0.0})};
  for (int i = 1; i < 32; ++i)
    iterates.push_back(compress(push_forward(iterates.back(), fam, mu0), {0.05, 0}).measure);
  auto average = [&](std::size_t n) {
    return cesaro_average(std::span<const DiscreteMeasure>(iterates.data(), n));
  };
  std::vector<DistanceInterval> d;
  for (std::size_t n : {2u, 4u, 8u, 16u}) d.push_back(wasserstein_interval(average(n), average(2 * n)));
  for (std::size_t i = 0; i + 1 < d.size(); ++i) CHECK(d[i + 1].upper < d[i].lower);
}

TEST_CASE("simulate_epoch with zero steps returns the start") {
  const ParticleCloud start(2, {0.1, 0.2, 0.3, 0.4}, 1, 5);
  int calls = 0;
  const ParticleCloud out =
      simulate_epoch(start, maple_leaf_family(), mu0, 0, 1, [&](const ParticleCloud&) { ++calls; });
  CHECK(out == start);
  CHECK(calls == 1);
  RandomStream rng(1);
  const auto all = simulate_epoch(start, maple_leaf_family(), mu0, 0, rng);
  REQUIRE(all.size() == 1);
  CHECK(all[0] == start);
}

TEST_CASE("a point-mass schedule gives the deterministic orbit") {
  const MapFamily fam = maple_leaf_family();
  const auto mu = SamplingMeasure::point_mass(4, MapIndex{2});
  const ParticleCloud start = ParticleCloud::replicate(std::vector{1.0, -1.0}, 3);
  const ParticleCloud out = simulate_epoch(start, fam, mu, 25, 9, nullptr);
  Eigen::VectorXd x(2);
  x << 1.0, -1.0;
  const auto& f = std::get<AffineMap>(fam[MapIndex{2}]);
  for (int i = 0; i < 25; ++i) x = f.apply(x);
  for (std::size_t p = 0; p < 3; ++p) {
    CHECK(out.point(p)[0] == doctest::Approx(x[0]).epsilon(1e-14));
    CHECK(out.point(p)[1] == doctest::Approx(x[1]).epsilon(1e-14));
  }
  CHECK(out.step() == 25);
}

TEST_CASE("simulate_epoch is independent of the worker count") {
  const ParticleCloud start = ParticleCloud::replicate(std::vector{0.0, 0.0}, 1000);
  std::vector<std::size_t> steps_seen;
  const ParticleCloud one = simulate_epoch(start, maple_leaf_family(), mu0, 50, 77,
                                           [&](const ParticleCloud& c) { steps_seen.push_back(c.step()); });
  const ParticleCloud four = simulate_epoch(start, maple_leaf_family(), mu0, 50, 77, nullptr, {4});
  CHECK(one == four);
  CHECK(steps_seen.size() == 51);
  CHECK(steps_seen.back() == 50);
  const ParticleCloud other = simulate_epoch(start, maple_leaf_family(), mu0, 50, 78, nullptr);
  CHECK_FALSE(other == one);
}

TEST_CASE("particle cloud mean tracks the exact push-forward iterate") {
  const MapFamily fam = maple_leaf_family();
  const ParticleCloud start = ParticleCloud::replicate(std::vector{0.0, 0.0}, 30000);
  const ParticleCloud cloud = simulate_epoch(start, fam, mu0, 100, 2026, nullptr, {4});
  DiscreteMeasure exact = DiscreteMeasure::dirac(std::vector{0.0, 0.0});
  const double h = 1e-4 * 2.0 * *absorbing_radius(fam);
  for (int i = 0; i < 100; ++i) exact = push_forward(exact, fam, mu0, {h, 10000}).measure;
  const auto a = cloud.to_measure().mean();
  const auto b = exact.mean();
  CHECK(std::hypot(a[0] - b[0], a[1] - b[1]) < 0.01);
}

TEST_CASE("histogram_density") {
  const ParticleCloud centre(2, {0.5, 0.5});
  const auto one = histogram_density(centre, {0, 1, 0, 1, 1, 1});
  CHECK(one == std::vector<double>{1.0});
  const ParticleCloud outside(2, {2.0, 0.5});
  CHECK(histogram_density(outside, {0, 1, 0, 1, 3, 3}) == std::vector<double>(9, 0.0));
  // Row-major with rows along y.
  const ParticleCloud corner(2, {0.9, 0.1});
  const auto m = histogram_density(corner, {0, 1, 0, 1, 2, 2});
  CHECK(m[1] == 1.0);

  RandomStream rng(31);
  std::vector<double> coords(2000000);
  for (double& c : coords) c = rng.uniform();
  const auto grid = histogram_density(ParticleCloud(2, coords), {0, 1, 0, 1, 10, 10});
  double total = 0.0;
  for (double b : grid) {
    CHECK(std::abs(b - 0.01) < 0.001);
    total += b;
  }
  CHECK(total <= 1.0 + 1e-12);
  CHECK_THROWS_AS(histogram_density(ParticleCloud(1, {0.0}), {0, 1, 0, 1, 1, 1}), InvalidInput);
}

TEST_CASE("invariant estimator on closed-form single maps") {
  const auto one = SamplingMeasure::uniform(1);
  InvariantOptions options;
  options.tol = 1e-6;
  options.start = {1.0};
  const InvariantEstimate origin = estimate_invariant_measure(line_map(0.5, 0.0), one, options);
  CHECK(wasserstein_1d(origin.measure, DiscreteMeasure::dirac(std::vector{0.0})) <= 1e-6);
  CHECK(origin.certificate <= 1e-6);

  const InvariantEstimate fixed = estimate_invariant_measure(line_map(0.5, 0.5), one, 1e-3, 200);
  CHECK(wasserstein_1d(fixed.measure, DiscreteMeasure::dirac(std::vector{1.0})) <= 1e-3);
}

TEST_CASE("invariant estimator errors") {
  const auto one = SamplingMeasure::uniform(1);
  CHECK_THROWS_AS(estimate_invariant_measure(line_map(1.0, 1.0), one, 1e-3, 10), NotContractive);
  try {
    estimate_invariant_measure(line_map(0.9, 1.0), one, 1e-12, 3);
    FAIL("expected ConvergenceFailure");
  } catch (const ConvergenceFailure& e) {
    CHECK(e.last_residual() > 0.0);
  }
  CHECK_THROWS_AS(estimate_invariant_measure(line_map(0.5, 0.0), one, 0.0, 10), InvalidInput);
}

TEST_CASE("maple-leaf invariant estimate meets its residual target") {
  InvariantOptions options;
  options.tol = 1e-2;
  const InvariantEstimate est = estimate_invariant_measure(maple_leaf_family(), mu0, options);
  const double r = contraction_factor(maple_leaf_family(), mu0);
  CHECK(est.residual <= options.tol * (1 - r));
  CHECK(est.certificate <= options.tol);
  // Re-certify independently of the estimator's own bookkeeping.
  CHECK(certified_residual(est.measure, maple_leaf_family(), mu0, est.resolution) / (1 - r) <= options.tol * (1 + 1e-9));
}
