// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#include <vector>

#include <benchmark/benchmark.h>

#include "pwifs/invariant.hpp"
#include "pwifs/maps.hpp"
#include "pwifs/particles.hpp"
#include "pwifs/rng.hpp"
#include "pwifs/schedule.hpp"
#include "pwifs/transport.hpp"

namespace {

pwifs::DiscreteMeasure random_measure(std::uint64_t seed, std::size_t atoms) {
  pwifs::RandomStream rng(seed);
  std::vector<double> c, w;
  for (std::size_t i = 0; i < atoms; ++i) {
    c.push_back(rng.uniform());
    c.push_back(rng.uniform());
    w.push_back(0.05 + rng.uniform());
  }
  return pwifs::DiscreteMeasure::normalized(2, c, w);
}

const pwifs::SamplingMeasure kMu0({0.23, 0.22, 0.22, 0.33});

void BM_PushForward(benchmark::State& state) {
  const auto fam = pwifs::maple_leaf_family();
  const auto nu = random_measure(1, state.range(0));
  const pwifs::CompressOptions prune{5.7e-4, 100000};
  for (auto _ : state) benchmark::DoNotOptimize(pwifs::push_forward(nu, fam, kMu0, prune));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 4);
}
BENCHMARK(BM_PushForward)->Arg(1000)->Arg(100000);

void BM_ExactTransport(benchmark::State& state) {
  const auto a = random_measure(2, state.range(0)), b = random_measure(3, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pwifs::wasserstein_exact(a, b).distance);
}
BENCHMARK(BM_ExactTransport)->Arg(50)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_Sinkhorn(benchmark::State& state) {
  const auto a = random_measure(4, state.range(0)), b = random_measure(5, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pwifs::sinkhorn(a, b).distance);
}
BENCHMARK(BM_Sinkhorn)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_HierarchicalCoupling(benchmark::State& state) {
  const auto a = random_measure(6, state.range(0)), b = random_measure(7, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pwifs::hierarchical_coupling_cost(a, b));
}
BENCHMARK(BM_HierarchicalCoupling)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_Simulation(benchmark::State& state) {
  const auto fam = pwifs::maple_leaf_family();
  const pwifs::ParticleCloud start(2, std::vector<double>(2 * state.range(0), 0.0));
  for (auto _ : state)
    benchmark::DoNotOptimize(pwifs::simulate_epoch(start, fam, kMu0, 100, 11, {}));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 100);
}
BENCHMARK(BM_Simulation)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_InvariantEstimate(benchmark::State& state) {
  const auto fam = pwifs::maple_leaf_family();
  pwifs::InvariantOptions options;
  options.tol = 1e-2;
  for (auto _ : state) benchmark::DoNotOptimize(pwifs::estimate_invariant_measure(fam, kMu0, options));
}
BENCHMARK(BM_InvariantEstimate)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
