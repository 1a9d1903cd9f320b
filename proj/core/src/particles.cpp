// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwifs/particles.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "measure_ops.hpp"
#include "pwifs/error.hpp"

namespace pwifs {

ParticleCloud::ParticleCloud(std::size_t dimension, std::vector<double> coords, std::size_t epoch,
                             std::size_t step)
    : dimension_(dimension), coords_(std::move(coords)), epoch_(epoch), step_(step) {
  if (dimension_ == 0) throw InvalidInput("ParticleCloud: dimension must be positive");
  if (coords_.empty() || coords_.size() % dimension_ != 0)
    throw InvalidInput("ParticleCloud: need at least one point with " +
                       std::to_string(dimension_) + " coordinates");
  for (double c : coords_)
    if (!std::isfinite(c)) throw InvalidInput("ParticleCloud: non-finite coordinate");
}

ParticleCloud ParticleCloud::replicate(std::span<const double> point, std::size_t count,
                                       std::size_t epoch) {
  std::vector<double> coords;
  coords.reserve(point.size() * count);
  for (std::size_t i = 0; i < count; ++i) coords.insert(coords.end(), point.begin(), point.end());
  return ParticleCloud(point.size(), std::move(coords), epoch, 0);
}

DiscreteMeasure ParticleCloud::to_measure() const {
  return DiscreteMeasure::empirical(dimension_, coords_);
}

namespace {

void check_family(const MapFamily& family, const SamplingMeasure& mu, std::size_t dimension) {
  if (mu.size() != family.size())
    throw InvalidInput("push_forward: sampling measure has " + std::to_string(mu.size()) +
                       " weights for " + std::to_string(family.size()) + " maps");
  if (dimension != family.dimension())
    throw InvalidInput("push_forward: measure dimension " + std::to_string(dimension) +
                       " does not match the family dimension " +
                       std::to_string(family.dimension()));
}

Compressed push_raw(const DiscreteMeasure& nu, const MapFamily& family, const SamplingMeasure& mu,
                    const CompressOptions& options) {
  check_family(family, mu, nu.dimension());
  const std::size_t d = nu.dimension(), m = family.size();
  std::size_t active = 0;
  for (double p : mu.weights()) active += p > 0.0;
  std::vector<double> coords(nu.size() * active * d), weights(nu.size() * active);
  std::size_t k = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const double p = mu.weights()[j];
    if (p <= 0.0) continue;
    for (std::size_t i = 0; i < nu.size(); ++i, ++k) {
      family.apply_into(j, nu.point(i), {coords.data() + k * d, d});
      weights[k] = p * nu.weight(i);
    }
  }
  for (double c : coords)
    if (!std::isfinite(c)) throw InvalidInput("push_forward: a map produced a non-finite point");
  return detail::compress_raw(d, std::move(coords), std::move(weights), options);
}

}  // namespace

DiscreteMeasure push_forward(const DiscreteMeasure& nu, const MapFamily& family,
                             const SamplingMeasure& mu) {
  return push_raw(nu, family, mu, CompressOptions{0.0, 0}).measure;
}

Compressed push_forward(const DiscreteMeasure& nu, const MapFamily& family,
                        const SamplingMeasure& mu, const CompressOptions& options) {
  return push_raw(nu, family, mu, options);
}

namespace {

// Advances particles [begin, end) of one block by one step.
void advance_block(const MapFamily& family, const SamplingMeasure& mu, RandomStream& stream,
                   std::span<double> coords, std::size_t d, std::size_t begin, std::size_t end,
                   std::vector<double>& scratch) {
  if (d == 2 && family.all_affine()) {
    // Same arithmetic as MapFamily::apply_into, without the indirection.
    const double* table = family.affine_table().data();
    double* c = coords.data() + begin * 2;
    for (std::size_t p = begin; p < end; ++p, c += 2) {
      const double* t = table + sample_zero_based(mu, stream.uniform()) * 6;
      const double x = c[0], y = c[1];
      c[0] = t[0] * x + t[1] * y + t[2];
      c[1] = t[3] * x + t[4] * y + t[5];
    }
    return;
  }
  scratch.resize(d);
  for (std::size_t p = begin; p < end; ++p) {
    const std::size_t j = sample_zero_based(mu, stream.uniform());
    std::span<double> x = coords.subspan(p * d, d);
    family.apply_into(j, x, scratch);
    std::copy(scratch.begin(), scratch.end(), x.begin());
  }
}

}  // namespace

ParticleCloud simulate_epoch(const ParticleCloud& start, const MapFamily& family,
                             const SamplingMeasure& mu, std::size_t steps, std::uint64_t seed,
                             const StepObserver& observer, const SimulationOptions& options) {
  check_family(family, mu, start.dimension());
  ParticleCloud cloud = start;
  if (observer) observer(cloud);
  if (steps == 0) return cloud;

  const std::size_t d = cloud.dimension(), n = cloud.size();
  const std::size_t blocks = (n + kParticleBlock - 1) / kParticleBlock;
  std::vector<RandomStream> streams;
  streams.reserve(blocks);
  for (std::size_t b = 0; b < blocks; ++b) streams.emplace_back(derive_seed(seed, {b}));
  const std::size_t base_step = start.step();
  const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, blocks);

  auto run_blocks = [&](std::size_t worker, std::vector<double>& scratch) {
    for (std::size_t b = worker; b < blocks; b += workers)
      advance_block(family, mu, streams[b], cloud.mutable_coords(), d, b * kParticleBlock,
                    std::min(n, (b + 1) * kParticleBlock), scratch);
  };

  if (workers == 1) {
    std::vector<double> scratch;
    for (std::size_t s = 1; s <= steps; ++s) {
      run_blocks(0, scratch);
      cloud.set_position(cloud.epoch(), base_step + s);
      if (observer) observer(cloud);
    }
    return cloud;
  }

  // Two barrier phases per step: move, then observe on the calling thread.
  std::barrier sync(static_cast<std::ptrdiff_t>(workers));
  std::atomic<bool> stop{false};
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < workers; ++w)
    pool.emplace_back([&, w] {
      std::vector<double> scratch;
      for (std::size_t s = 1; s <= steps; ++s) {
        run_blocks(w, scratch);
        sync.arrive_and_wait();
        sync.arrive_and_wait();
        if (stop.load()) return;
      }
    });
  std::vector<double> scratch;
  std::exception_ptr failure;
  for (std::size_t s = 1; s <= steps; ++s) {
    run_blocks(0, scratch);
    sync.arrive_and_wait();
    cloud.set_position(cloud.epoch(), base_step + s);
    if (observer && !failure) {
      try {
        observer(cloud);
      } catch (...) {
        failure = std::current_exception();
        stop.store(true);
      }
    }
    sync.arrive_and_wait();
    if (failure) break;
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
  return cloud;
}

std::vector<ParticleCloud> simulate_epoch(const ParticleCloud& start, const MapFamily& family,
                                          const SamplingMeasure& mu, std::size_t steps,
                                          RandomStream& rng, const SimulationOptions& options) {
  std::vector<ParticleCloud> out;
  out.reserve(steps + 1);
  simulate_epoch(start, family, mu, steps, rng.next(),
                 [&](const ParticleCloud& c) { out.push_back(c); }, options);
  return out;
}

std::vector<double> histogram_density(const ParticleCloud& cloud, const HistogramGrid& grid) {
  if (cloud.dimension() != 2) throw InvalidInput("histogram_density: cloud must be 2-D");
  if (grid.bins_x == 0 || grid.bins_y == 0) throw InvalidInput("histogram_density: bins must be >= 1");
  if (!(grid.x_max > grid.x_min) || !(grid.y_max > grid.y_min))
    throw InvalidInput("histogram_density: empty grid bounds");
  std::vector<std::size_t> counts(grid.bins_x * grid.bins_y, 0);
  auto bin = [](double v, double lo, double hi, std::size_t bins) -> std::ptrdiff_t {
    if (v < lo || v > hi) return -1;
    const auto k = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
    return static_cast<std::ptrdiff_t>(std::min(k, bins - 1));
  };
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    const auto ix = bin(p[0], grid.x_min, grid.x_max, grid.bins_x);
    const auto iy = bin(p[1], grid.y_min, grid.y_max, grid.bins_y);
    if (ix < 0 || iy < 0) continue;
    ++counts[static_cast<std::size_t>(iy) * grid.bins_x + static_cast<std::size_t>(ix)];
  }
  std::vector<double> mass(counts.size());
  const double n = static_cast<double>(cloud.size());
  for (std::size_t b = 0; b < counts.size(); ++b) mass[b] = static_cast<double>(counts[b]) / n;
  return mass;
}

}  // namespace pwifs
