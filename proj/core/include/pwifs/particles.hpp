// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pwifs/discrete_measure.hpp"
#include "pwifs/maps.hpp"
#include "pwifs/rng.hpp"
#include "pwifs/schedule.hpp"

namespace pwifs {

/// N equally weighted points on R^d, tagged with epoch k and step i.
class ParticleCloud {
 public:
  ParticleCloud(std::size_t dimension, std::vector<double> coords, std::size_t epoch = 0,
                std::size_t step = 0);

  /// N copies of one point.
  static ParticleCloud replicate(std::span<const double> point, std::size_t count,
                                 std::size_t epoch = 0);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return coords_.size() / dimension_; }
  std::span<const double> point(std::size_t i) const noexcept {
    return {coords_.data() + i * dimension_, dimension_};
  }
  std::span<const double> coords() const noexcept { return coords_; }
  std::span<double> mutable_coords() noexcept { return coords_; }
  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t step() const noexcept { return step_; }
  void set_position(std::size_t epoch, std::size_t step) noexcept {
    epoch_ = epoch;
    step_ = step;
  }

  /// Empirical measure (1/N) sum delta_x, coincident points merged.
  DiscreteMeasure to_measure() const;

  friend bool operator==(const ParticleCloud&, const ParticleCloud&) = default;

 private:
  std::size_t dimension_;
  std::vector<double> coords_;
  std::size_t epoch_ = 0;
  std::size_t step_ = 0;
};

/// P* nu = sum_j mu(j) nu o f_j^{-1}, exact: every (atom, map) pair is kept
/// and only coincident images are merged.
DiscreteMeasure push_forward(const DiscreteMeasure& nu, const MapFamily& family,
                             const SamplingMeasure& mu);

/// P* nu followed by grid merging and pruning; the returned error bound
/// covers the W1 distance to the exact image.
Compressed push_forward(const DiscreteMeasure& nu, const MapFamily& family,
                        const SamplingMeasure& mu, const CompressOptions& options);

struct SimulationOptions {
  /// Worker threads. Output does not depend on this.
  std::size_t threads = 1;
};

/// Particles are advanced in blocks of this many; block b draws from the
/// stream seeded with derive_seed(seed, {b}), one uniform per particle per
/// step in particle order.
inline constexpr std::size_t kParticleBlock = 256;

/// Called with the cloud after every step, and once with step 0 before the
/// first move.
using StepObserver = std::function<void(const ParticleCloud&)>;

/// Advances every particle `steps` times with maps drawn i.i.d. from mu and
/// returns the final cloud, whose step is start.step() + steps.
ParticleCloud simulate_epoch(const ParticleCloud& start, const MapFamily& family,
                             const SamplingMeasure& mu, std::size_t steps, std::uint64_t seed,
                             const StepObserver& observer, const SimulationOptions& options = {});

/// Every intermediate cloud, start included (steps + 1 entries). One
/// quantum of `rng` is consumed to seed the particle streams.
std::vector<ParticleCloud> simulate_epoch(const ParticleCloud& start, const MapFamily& family,
                                          const SamplingMeasure& mu, std::size_t steps,
                                          RandomStream& rng, const SimulationOptions& options = {});

/// Axis-aligned grid on R^2 for histograms.
struct HistogramGrid {
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
  std::size_t bins_x = 1, bins_y = 1;
};

/// Fraction of points per bin, row-major with rows along y:
/// mass[iy * bins_x + ix]. Bins are half-open except at the upper edges,
/// which are included. Points outside the grid are not counted.
std::vector<double> histogram_density(const ParticleCloud& cloud, const HistogramGrid& grid);

}  // namespace pwifs
