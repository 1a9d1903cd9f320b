// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pwifs/maps.hpp"
#include "pwifs/schedule.hpp"

namespace pwifs {

inline constexpr int kConfigSchemaVersion = 1;

struct PruneConfig {
  /// Merge grid for the push-forward iterates behind the tracking bounds;
  /// zero means the invariant-estimate grid.
  double merge_resolution = 0.0;
  std::size_t max_atoms = 100000;
};

struct InvariantConfig {
  double tol = 1e-3;
  std::size_t max_iter = 200;
  /// Zero means 1e-4 times the absorbing diameter.
  double resolution = 0.0;
  std::size_t max_atoms = std::size_t{1} << 20;
};

struct DistanceConfig {
  std::size_t cadence = 100;
  /// Every step up to this one is also sampled.
  std::size_t dense_prefix = 32;
  std::size_t subsample = 250;
  std::size_t resamples = 5;
  /// Steps between subsampling-error probes (plus the first and last step).
  std::size_t error_cadence = 5000;
  /// Atom budget for the coarsened invariant measure used as reference.
  std::size_t reference_atoms = 250;
  std::size_t exact_cap = 2000;
};

struct BoundsConfig {
  /// The sum of sup-norm map differences between epochs; zero for a fixed
  /// family.
  double map_drift = 0.0;
  /// Exact push-forward steps per epoch before the geometric tail takes
  /// over in the cumulative tracking distance.
  std::size_t regret_steps = 6;
};

struct FigureConfig {
  bool enabled = true;
  std::size_t bins = 120;
  /// x_min, x_max, y_min, y_max; empty means fitted to the trajectory.
  std::optional<std::array<double, 4>> bounds;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::uint64_t seed = 0;
  MapFamily family;
  Schedule schedule;
  std::size_t particles = 2000;
  std::vector<double> start_point;
  PruneConfig prune;
  InvariantConfig invariant;
  DistanceConfig distances;
  BoundsConfig bounds;
  FigureConfig figures;
  std::string output_dir = "out";
};

/// Strict parse: unknown keys, wrong types and failed module invariants all
/// raise InvalidInput naming the offending key.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON with every field spelled out (defaults included).
std::string to_json(const ExperimentConfig& config);

}  // namespace pwifs
