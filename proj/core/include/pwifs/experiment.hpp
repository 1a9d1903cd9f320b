// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pwifs/bounds.hpp"
#include "pwifs/config.hpp"
#include "pwifs/discrete_measure.hpp"
#include "pwifs/particles.hpp"
#include "pwifs/transport.hpp"

namespace pwifs {

std::string library_version();

struct RunOptions {
  /// Empty means config.output_dir.
  std::filesystem::path output_dir;
  std::size_t threads = 1;
  /// SVG output; combined with config.figures.enabled. CSVs are always written.
  bool figures = true;
  std::optional<std::uint64_t> seed;
  std::function<void(const std::string&)> log;
};

/// One row of distance_series.csv. Both distances are exact W1 between
/// fixed-size particle subsamples (the reference for d_to_invariant is the
/// invariant estimate coarsened to the same budget).
struct SeriesPoint {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double d_subsequent = 0.0;
  double d_to_invariant = 0.0;
};

/// d_to_invariant recomputed on a fresh random subsample, to gauge the
/// subsampling noise.
struct SubsampleProbe {
  std::size_t epoch = 0;
  std::size_t step = 0;
  std::size_t resample = 0;
  double d_to_invariant = 0.0;
};

struct EpochInvariant {
  DiscreteMeasure measure;
  double contraction = 0.0;
  double residual = 0.0;
  /// Certified W1 distance to the true invariant measure.
  double certificate = 0.0;
  double resolution = 0.0;
  std::size_t iterations = 0;
};

struct BoundsAnalysis {
  BoundsReport report;
  /// W1 between consecutive invariant estimates.
  std::vector<DistanceInterval> invariant_gaps;
  /// Lower bounds on W1(P_k* nu_k^0, nu_k^0) used by the tracking bounds.
  std::vector<double> d10;
};

struct RunArtifacts {
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  /// Cloud at step 0 and at the last step of each epoch.
  std::vector<ParticleCloud> first_clouds;
  std::vector<ParticleCloud> final_clouds;
  /// Sample path of particle 0 per epoch (steps 1..t), coordinates
  /// interleaved.
  std::vector<std::vector<double>> trajectories;
  std::vector<EpochInvariant> invariants;
  /// W1 bound between each invariant estimate and its subsampling reference.
  std::vector<double> reference_errors;
  std::vector<SeriesPoint> series;
  std::vector<SubsampleProbe> probes;
  BoundsAnalysis bounds;
  /// Paths relative to output_dir, as listed in manifest.json.
  std::vector<std::string> data_files;
  std::vector<std::string> figure_files;
};

/// Runs every epoch in order, carrying the final cloud of one epoch into the
/// next, and writes data, figures and manifest.json to the output directory.
/// Module errors are rethrown with epoch and step context.
RunArtifacts run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Invariant estimate per epoch, sequential or one thread per epoch.
std::vector<EpochInvariant> estimate_invariants(const ExperimentConfig& config,
                                                std::size_t threads = 1);

/// Evaluates every bound on exact push-forward iterates started from the
/// configured point (epoch 0) or the previous invariant estimate.
BoundsAnalysis compute_bounds(const ExperimentConfig& config,
                              std::span<const EpochInvariant> invariants);

/// Recomputes the bounds from a finished run directory.
BoundsAnalysis analyze_run(const std::filesystem::path& run_dir);

}  // namespace pwifs
