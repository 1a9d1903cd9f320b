// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include <doctest.h>

#include "oracles.hpp"
#include "pwifs/bounds.hpp"
#include "pwifs/error.hpp"
#include "pwifs/invariant.hpp"
#include "pwifs/particles.hpp"
#include "pwifs/rng.hpp"

using namespace pwifs;

namespace {

const SamplingMeasure mu0({0.23, 0.22, 0.22, 0.33});
const SamplingMeasure mu1({0.5, 0.2, 0.2, 0.1});
const SamplingMeasure mu2({0.3, 0.1, 0.4, 0.2});

std::vector<double> oracle_norms() {
  const double s = 0.355;
  return {oracle::spectral_norm_2x2({0.8, 0, 0, 0.8}), oracle::spectral_norm_2x2({0.5, 0, 0, 0.5}),
          oracle::spectral_norm_2x2({s, s, s, -s}), oracle::spectral_norm_2x2({s, -s, -s, -s})};
}

MapFamily line_map(double a, double b) {
  return MapFamily{AffineMap::from_row_major(std::vector{a}, std::vector{b})};
}

}  // namespace

TEST_CASE("contraction factors of the maple-leaf weights") {
  const MapFamily fam = maple_leaf_family();
  CHECK(contraction_factor(fam, SamplingMeasure::point_mass(4, MapIndex{1})) == doctest::Approx(0.8).epsilon(1e-15));
  const auto l = oracle_norms();
  CHECK(std::abs(contraction_factor(fam, mu0) - oracle::weighted_sum({0.23, 0.22, 0.22, 0.33}, l)) < 1e-12);
  CHECK(std::abs(contraction_factor(fam, mu1) - oracle::weighted_sum({0.5, 0.2, 0.2, 0.1}, l)) < 1e-12);
  CHECK(std::abs(contraction_factor(fam, mu2) - oracle::weighted_sum({0.3, 0.1, 0.4, 0.2}, l)) < 1e-12);
  CHECK(std::abs(contraction_factor(fam, mu0) - 0.570125) < 1e-6);
  CHECK(std::abs(contraction_factor(fam, mu1) - 0.650614) < 1e-6);
  CHECK_THROWS_AS(contraction_factor(fam, SamplingMeasure::uniform(3)), InvalidInput);
}

TEST_CASE("property: contraction factor is linear in the weights") {
  const MapFamily fam = maple_leaf_family();
  RandomStream rng(6);
  for (int t = 0; t < 100; ++t) {
    const double lambda = rng.uniform();
    std::vector<double> mix(4);
    for (std::size_t j = 0; j < 4; ++j) mix[j] = lambda * mu0.weights()[j] + (1 - lambda) * mu2.weights()[j];
    const double lhs = contraction_factor(fam, SamplingMeasure(mix));
    const double rhs = lambda * contraction_factor(fam, mu0) + (1 - lambda) * contraction_factor(fam, mu2);
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("aposteriori bound") {
  const auto one = SamplingMeasure::uniform(1);
  CHECK(aposteriori_bound(DiscreteMeasure::dirac(std::vector{0.0}), line_map(0.5, 0.0), one) == 0.0);
  CHECK(std::abs(aposteriori_bound(DiscreteMeasure::dirac(std::vector{1.0}), line_map(0.5, 0.0), one) - 1.0) < 1e-12);
  CHECK_THROWS_AS(aposteriori_bound(DiscreteMeasure::dirac(std::vector{1.0}), line_map(1.0, 0.0), one),
                  NotContractive);
}

TEST_CASE("subsequent invariants bound") {
  const MapFamily fam = maple_leaf_family();
  const double B = 2.0 * *absorbing_radius(fam);
  CHECK(subsequent_invariants_bound(fam, mu0, mu0, B, 1.0) == 0.0);
  const double r = std::max(contraction_factor(fam, mu0), contraction_factor(fam, mu1));
  const double expected = B * tv_distance(mu0, mu1) / (1 - r);
  CHECK(std::abs(subsequent_invariants_bound(fam, mu0, mu1, B, 1.0) - expected) < 1e-12);
  CHECK(std::abs(subsequent_invariants_bound(fam, mu0, mu1, B, 1.0) - 8.895) < 1e-3);
  CHECK(std::abs(subsequent_invariants_bound(fam, mu0, mu0, B, 1.0, 0.1) - 0.1 / (1 - contraction_factor(fam, mu0))) <
        1e-12);
  const MapFamily loose{AffineMap::from_row_major(std::vector{1.0}, std::vector{0.0}),
                        AffineMap::from_row_major(std::vector{0.5}, std::vector{0.0})};
  CHECK_THROWS_AS(subsequent_invariants_bound(loose, SamplingMeasure({1.0, 0.0}), SamplingMeasure({0.5, 0.5}), 1.0,
                                              1.0),
                  NotContractive);
}

TEST_CASE("tracking and regret bounds") {
  CHECK(tracking_error_bound(1.0, 0.5) == 2.0);
  CHECK(tracking_error_bound(0.0, 0.5) == 0.0);
  CHECK_THROWS_AS(tracking_error_bound(1.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(tracking_error_bound(1.0, 0.0), InvalidInput);
  CHECK_THROWS_AS(tracking_error_bound(-1.0, 0.5), InvalidInput);
  CHECK(regret_bound(std::vector<double>{}, 0.5) == 0.0);
  CHECK(regret_bound(std::vector<double>{1.0}, 0.5) == 4.0);
  const std::vector<double> d{0.1, 0.2}, r{0.5, 0.25};
  CHECK(std::abs(regret_bound(d, r) - (2 * 2.0 * 0.1 + 2 * 0.25 / 0.5625 * 0.2)) < 1e-15);
  CHECK_THROWS_AS(regret_bound(d, std::vector<double>{0.5}), InvalidInput);
}

TEST_CASE("property: bounds are monotone in their distance arguments") {
  RandomStream rng(14);
  const MapFamily fam = maple_leaf_family();
  for (int t = 0; t < 100; ++t) {
    const double a = rng.uniform(), b = a + rng.uniform(), r = 0.05 + 0.9 * rng.uniform();
    CHECK(tracking_error_bound(a, r) <= tracking_error_bound(b, r));
    CHECK(regret_bound(std::vector{a, a}, r) <= regret_bound(std::vector{a, b}, r));
    CHECK(subsequent_invariants_bound(fam, mu0, mu1, 5.0, 1.0, a) <=
          subsequent_invariants_bound(fam, mu0, mu1, 5.0, 1.0, b));
    CHECK(subsequent_invariants_bound(fam, mu0, mu1, a, 1.0) <= subsequent_invariants_bound(fam, mu0, mu1, b, 1.0));
  }
  // Larger e with r held fixed.
  const SamplingMeasure near({0.25, 0.22, 0.22, 0.31});
  CHECK(subsequent_invariants_bound(fam, mu0, near, 5.0, 1.0) <=
        subsequent_invariants_bound(fam, mu0, SamplingMeasure({0.3, 0.22, 0.22, 0.26}), 5.0, 1.0));
}

TEST_CASE("geometric decay check on closed-form orbits") {
  std::vector<DiscreteMeasure> constant(5, DiscreteMeasure::dirac(std::vector{1.0}));
  const DecayReport flat = geometric_decay_check(constant, 0.5);
  CHECK(flat.passed);
  CHECK(flat.d10 == 0.0);

  std::vector<DiscreteMeasure> orbit;
  double x = 1.0;
  for (int i = 0; i < 12; ++i, x *= 0.5) orbit.push_back(DiscreteMeasure::dirac(std::vector{x}));
  const DecayReport report = geometric_decay_check(orbit, 0.5);
  CHECK(report.passed);
  for (const auto& s : report.steps) CHECK(std::abs(s.observed - std::pow(0.5, double(s.i)) * 0.5) < 1e-15);

  // Decay slower than r must fail.
  std::vector<DiscreteMeasure> slow;
  x = 1.0;
  for (int i = 0; i < 12; ++i, x *= 0.9) slow.push_back(DiscreteMeasure::dirac(std::vector{x}));
  CHECK_FALSE(geometric_decay_check(slow, 0.5).passed);
  CHECK_THROWS_AS(geometric_decay_check(std::span(orbit.data(), 2), 0.5), InvalidInput);
}

TEST_CASE("property: push-forward contracts W1 by r") {
  const MapFamily fam = maple_leaf_family();
  RandomStream rng(15);
  for (const auto* mu : {&mu0, &mu1, &mu2}) {
    const double r = contraction_factor(fam, *mu);
    for (int t = 0; t < 20; ++t) {
      auto random = [&] {
        std::vector<double> c, w;
        for (std::size_t i = 0, n = 1 + rng.below(20); i < n; ++i) {
          c.push_back(4 * rng.uniform() - 2);
          c.push_back(4 * rng.uniform() - 2);
          w.push_back(rng.uniform() + 0.01);
        }
        return DiscreteMeasure::normalized(2, c, w);
      };
      const auto a = random(), b = random();
      const double before = wasserstein_exact(a, b).distance;
      const double after = wasserstein_exact(push_forward(a, fam, *mu), push_forward(b, fam, *mu)).distance;
      CHECK(after <= r * before + 1e-9);
    }
  }
}

TEST_CASE("bounds report serialises") {
  BoundsReport report;
  report.r_per_epoch = {0.5};
  report.B = 2.0;
  report.records.push_back(make_record("x", 0, 1.0, 1.0 + 5e-10));
  report.records.push_back(make_record("y", 0, 1.0, 1.1, "note"));
  CHECK(report.records[0].satisfied);
  CHECK_FALSE(report.records[1].satisfied);
  CHECK_FALSE(report.all_satisfied());
  const std::string json = to_json(report);
  CHECK(json.find("\"all_satisfied\": false") != std::string::npos);
  CHECK(to_table(report).find("NO") != std::string::npos);
}
