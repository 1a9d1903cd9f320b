// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwifs/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "json.hpp"
#include "pwifs/error.hpp"
#include "pwifs/figures.hpp"
#include "pwifs/invariant.hpp"
#include "pwifs/manifest.hpp"
#include "pwifs/rng.hpp"
#include "pwifs/table_io.hpp"

#ifndef PWIFS_VERSION
#define PWIFS_VERSION "0.0.0"
#endif

namespace pwifs {

std::string library_version() { return PWIFS_VERSION; }

namespace {

using Clock = std::chrono::steady_clock;

[[noreturn]] void rethrow_with(const std::string& where) {
  try {
    throw;
  } catch (const NotContractive& e) {
    throw NotContractive(where + ": " + e.what(), e.factor());
  } catch (const ConvergenceFailure& e) {
    throw ConvergenceFailure(where + ": " + e.what(), e.last_residual());
  } catch (const SizeError& e) {
    throw SizeError(where + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw InvalidInput(where + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(where + ": " + e.what());
  }
}

template <typename Fn>
auto with_context(const std::string& where, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (...) {
    rethrow_with(where);
  }
}

double default_resolution(const MapFamily& family) {
  const auto radius = absorbing_radius(family);
  return radius ? 1e-4 * 2.0 * *radius : 0.0;
}

double invariant_resolution(const ExperimentConfig& config) {
  return config.invariant.resolution > 0.0 ? config.invariant.resolution
                                           : default_resolution(config.family);
}

// Certified upper end of W1: exact when small, otherwise a feasible coupling.
double upper_distance(const DiscreteMeasure& a, const DiscreteMeasure& b, double resolution) {
  IntervalOptions options;
  if (a.size() + b.size() <= options.exact_atoms) return wasserstein_exact(a, b).distance;
  options.resolution = resolution;
  return hierarchical_coupling_cost(a, b, {}, options);
}

void validate_config(const ExperimentConfig& config) {
  check_compatible(config.schedule, config.family);
  const ScheduleValidation v = validate_schedule(config.schedule);
  if (!v.passed)
    throw InvalidInput(fmt::format("schedule: TV step {} exceeds the bound {}",
                                   format_number(v.max_step),
                                   format_number(config.schedule.tv_bound())));
  if (config.start_point.size() != config.family.dimension())
    throw InvalidInput("start_point has the wrong dimension");
  for (std::size_t k = 0; k < config.schedule.size(); ++k) {
    const double r = contraction_factor(config.family, config.schedule.epochs()[k].measure);
    if (!(r < 1.0))
      throw NotContractive(fmt::format("epoch {}: contraction factor {} is not below 1", k,
                                       format_number(r)),
                           r);
  }
}

// m distinct indices out of n (all of them when m >= n), in increasing order.
std::vector<std::size_t> choose_subset(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (m >= n) return idx;
  RandomStream rng(seed);
  for (std::size_t i = 0; i < m; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

DiscreteMeasure gather(const ParticleCloud& cloud, const std::vector<std::size_t>& subset) {
  std::vector<double> coords;
  coords.reserve(subset.size() * cloud.dimension());
  for (std::size_t i : subset) {
    const auto p = cloud.point(i);
    coords.insert(coords.end(), p.begin(), p.end());
  }
  return DiscreteMeasure::empirical(cloud.dimension(), std::move(coords));
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string out;
  for (const auto& c : cells) {
    if (!out.empty()) out += ',';
    out += c;
  }
  out += '\n';
  return out;
}

std::string invariants_json(const std::vector<EpochInvariant>& invariants,
                            const std::vector<double>& reference_errors) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < invariants.size(); ++k) {
    const auto& inv = invariants[k];
    nlohmann::ordered_json e;
    e["epoch"] = k;
    e["contraction"] = inv.contraction;
    e["residual"] = inv.residual;
    e["certificate"] = inv.certificate;
    e["iterations"] = inv.iterations;
    e["resolution"] = inv.resolution;
    e["atoms"] = inv.measure.size();
    e["table"] = fmt::format("invariant_epoch{}.csv", k);
    if (k < reference_errors.size()) e["reference_error"] = reference_errors[k];
    j.push_back(e);
  }
  return j.dump(2) + "\n";
}

PlotBounds fitted_bounds(const std::vector<std::vector<double>>& trajectories) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& t : trajectories)
    for (std::size_t i = 0; i + 1 < t.size(); i += 2) {
      x0 = std::min(x0, t[i]);
      x1 = std::max(x1, t[i]);
      y0 = std::min(y0, t[i + 1]);
      y1 = std::max(y1, t[i + 1]);
    }
  if (!std::isfinite(x0)) return {0.0, 1.0, 0.0, 1.0};
  const double px = std::max(0.02 * (x1 - x0), 1e-9), py = std::max(0.02 * (y1 - y0), 1e-9);
  return {x0 - px, x1 + px, y0 - py, y1 + py};
}

const char* kEpochColours[] = {"#d62728", "#2ca02c", "#1f77b4", "#ff7f0e", "#9467bd", "#8c564b"};

const char* colour(std::size_t k) { return kEpochColours[k % std::size(kEpochColours)]; }

}  // namespace

std::vector<EpochInvariant> estimate_invariants(const ExperimentConfig& config,
                                                std::size_t threads) {
  const auto epochs = config.schedule.epochs();
  auto one = [&](std::size_t k) {
    return with_context(fmt::format("epoch {}, invariant estimate", k), [&] {
      InvariantOptions options;
      options.tol = config.invariant.tol;
      options.max_iter = config.invariant.max_iter;
      options.resolution = config.invariant.resolution;
      options.max_atoms = config.invariant.max_atoms;
      options.start = config.start_point;
      InvariantEstimate est = estimate_invariant_measure(config.family, epochs[k].measure, options);
      return EpochInvariant{std::move(est.measure), est.contraction, est.residual,
                            est.certificate, est.resolution, est.iterations};
    });
  };
  std::vector<EpochInvariant> out;
  if (threads <= 1) {
    for (std::size_t k = 0; k < epochs.size(); ++k) out.push_back(one(k));
    return out;
  }
  std::vector<std::future<EpochInvariant>> jobs;
  for (std::size_t k = 0; k < epochs.size(); ++k) jobs.push_back(std::async(std::launch::async, one, k));
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

BoundsAnalysis compute_bounds(const ExperimentConfig& config,
                              std::span<const EpochInvariant> invariants) {
  const auto epochs = config.schedule.epochs();
  if (invariants.size() != epochs.size())
    throw InvalidInput("compute_bounds: one invariant estimate per epoch is required");
  BoundsAnalysis out;
  BoundsReport& report = out.report;
  const auto radius = absorbing_radius(config.family);
  report.absorbing_radius = radius ? *radius : std::numeric_limits<double>::infinity();
  report.B = 2.0 * report.absorbing_radius;
  report.M = 1.0;
  report.tv_budget = config.schedule.tv_bound();
  for (const auto& e : epochs) report.r_per_epoch.push_back(contraction_factor(config.family, e.measure));
  for (std::size_t k = 0; k + 1 < epochs.size(); ++k)
    report.e_observed.push_back(tv_distance(epochs[k].measure, epochs[k + 1].measure));

  const double h = invariant_resolution(config);
  const CompressOptions prune{config.prune.merge_resolution > 0.0 ? config.prune.merge_resolution : h,
                              config.prune.max_atoms};
  for (std::size_t k = 0; k < epochs.size(); ++k)
    report.records.push_back(make_record("aposteriori", k, config.invariant.tol,
                                         invariants[k].certificate,
                                         fmt::format("{} iterations", invariants[k].iterations)));

  for (std::size_t k = 0; k + 1 < epochs.size(); ++k) {
    with_context(fmt::format("epoch {}, subsequent invariants", k), [&] {
      IntervalOptions interval;
      interval.resolution = h;
      const DistanceInterval gap =
          wasserstein_interval(invariants[k].measure, invariants[k + 1].measure, {}, interval);
      out.invariant_gaps.push_back(gap);
      const double certs = invariants[k].certificate + invariants[k + 1].certificate;
      const double bound =
          radius ? subsequent_invariants_bound(config.family, epochs[k].measure,
                                               epochs[k + 1].measure, report.B, report.M,
                                               config.bounds.map_drift)
                 : std::numeric_limits<double>::infinity();
      const double separation = gap.lower - certs;
      report.records.push_back(make_record(
          "subsequent_invariants", k, bound, gap.upper + certs,
          fmt::format("lower {}; {}", format_number(separation),
                      separation > 0.0 ? "measures differ" : "difference not certified")));
    });
  }

  std::vector<double> cumulative;
  for (std::size_t k = 0; k < epochs.size(); ++k) {
    with_context(fmt::format("epoch {}, tracking", k), [&] {
      const SamplingMeasure& mu = epochs[k].measure;
      const double r = report.r_per_epoch[k];
      const DiscreteMeasure start =
          k == 0 ? DiscreteMeasure::dirac(config.start_point) : invariants[k - 1].measure;
      DiscreteMeasure current = push_forward(start, config.family, mu);
      IntervalOptions interval;
      interval.resolution = h;
      const double d10 = wasserstein_interval(current, start, {}, interval).lower;
      out.d10.push_back(d10);
      const double cert = invariants[k].certificate;

      // u_s bounds d(nu^s, nu*) for the exact iterate nu^s; e_s is the
      // distance of the computed iterate from the exact one.
      double e_s = 0.0, total = 0.0, u_s = 0.0;
      for (std::size_t s = 1; s <= config.bounds.regret_steps; ++s) {
        if (s > 1) {
          Compressed next = push_forward(current, config.family, mu, prune);
          e_s = r * e_s + next.error_bound();
          current = std::move(next.measure);
        }
        u_s = upper_distance(current, invariants[k].measure, h) + e_s + cert;
        if (s == 1)
          report.records.push_back(make_record("tracking_error", k, tracking_error_bound(d10, r), u_s,
                                               fmt::format("d10 >= {}", format_number(d10))));
        total += u_s;
      }
      // d(nu^s, nu*) <= r^(s - S) d(nu^S, nu*) beyond the computed steps.
      total += u_s * r / (1.0 - r);
      cumulative.push_back(total);
      report.records.push_back(make_record("cumulative_tracking", k,
                                           2.0 * tracking_error_bound(d10, r), total,
                                           "all steps, geometric tail"));
    });
  }
  if (!epochs.empty()) {
    const double total = std::accumulate(cumulative.begin(), cumulative.end(), 0.0);
    report.records.push_back(make_record("regret", epochs.size() - 1,
                                         regret_bound(out.d10, report.r_per_epoch), total,
                                         "sum over epochs"));
  }
  return out;
}

RunArtifacts run_experiment(const ExperimentConfig& input, const RunOptions& options) {
  ExperimentConfig config = input;
  if (options.seed) config.seed = *options.seed;
  validate_config(config);
  auto log = [&](const std::string& line) {
    if (options.log) options.log(line);
  };

  RunArtifacts art;
  art.output_dir = options.output_dir.empty() ? std::filesystem::path(config.output_dir)
                                              : options.output_dir;
  art.seed = config.seed;
  const auto epochs = config.schedule.epochs();
  const std::size_t d = config.family.dimension();
  const auto& dist = config.distances;

  auto t0 = Clock::now();
  art.invariants = estimate_invariants(config, options.threads);
  for (std::size_t k = 0; k < art.invariants.size(); ++k)
    log(fmt::format("epoch {}: invariant estimate, {} atoms, certificate {:.3g}", k,
                    art.invariants[k].measure.size(), art.invariants[k].certificate));
  log(fmt::format("invariant estimates: {:.2f} s",
                  std::chrono::duration<double>(Clock::now() - t0).count()));

  // Subsampling references: each estimate coarsened to the subsample budget.
  std::vector<DiscreteMeasure> references;
  for (const auto& inv : art.invariants) {
    Compressed ref = coarsen_to(inv.measure, dist.reference_atoms);
    art.reference_errors.push_back(ref.error_bound() + inv.certificate);
    references.push_back(std::move(ref.measure));
  }

  t0 = Clock::now();
  ParticleCloud cloud = ParticleCloud::replicate(config.start_point, config.particles, 0);
  for (std::size_t k = 0; k < epochs.size(); ++k) {
    const std::size_t length = epochs[k].length;
    cloud.set_position(k, 0);
    const auto subset = choose_subset(config.particles, dist.subsample, derive_seed(config.seed, {k, 1}));
    std::vector<double> trajectory;
    trajectory.reserve(length * d);
    DiscreteMeasure previous = DiscreteMeasure::dirac(config.start_point);
    std::size_t step = 0;
    auto sampled = [&](std::size_t s) {
      return s <= dist.dense_prefix || s % dist.cadence == 0 || s == length;
    };
    auto probed = [&](std::size_t s) {
      return dist.resamples > 0 && (s == 1 || s == length || (dist.error_cadence > 0 && s % dist.error_cadence == 0));
    };
    auto observer = [&](const ParticleCloud& c) {
      step = c.step();
      if (step == 0) {
        art.first_clouds.push_back(c);
      } else {
        const auto p = c.point(0);
        trajectory.insert(trajectory.end(), p.begin(), p.end());
      }
      const bool need_now = step > 0 && sampled(step);
      if (!need_now && !sampled(step + 1) && !probed(step)) return;
      DiscreteMeasure sub = gather(c, subset);
      if (need_now) {
        art.series.push_back({k, step, wasserstein_exact(sub, previous).distance,
                              wasserstein_exact(sub, references[k]).distance});
      }
      if (step > 0 && probed(step)) {
        for (std::size_t r = 0; r < dist.resamples; ++r) {
          const auto fresh = choose_subset(config.particles, dist.subsample,
                                           derive_seed(config.seed, {k, 2, step, r}));
          art.probes.push_back(
              {k, step, r, wasserstein_exact(gather(c, fresh), references[k]).distance});
        }
      }
      previous = std::move(sub);
    };
    try {
      cloud = simulate_epoch(cloud, config.family, epochs[k].measure, length,
                             derive_seed(config.seed, {k}), observer, {options.threads});
    } catch (...) {
      rethrow_with(fmt::format("epoch {}, step {}", k, step));
    }
    art.final_clouds.push_back(cloud);
    art.trajectories.push_back(std::move(trajectory));
  }
  log(fmt::format("simulation and distance series: {:.2f} s",
                  std::chrono::duration<double>(Clock::now() - t0).count()));

  t0 = Clock::now();
  art.bounds = compute_bounds(config, art.invariants);
  log(fmt::format("bounds: {:.2f} s", std::chrono::duration<double>(Clock::now() - t0).count()));

  // Data files.
  const auto& out = art.output_dir;
  auto write_data = [&](const std::string& rel, const std::string& text) {
    write_text_file(out / rel, text);
    art.data_files.push_back(rel);
  };
  auto write_figure = [&](const std::string& rel, const std::string& text) {
    write_text_file(out / rel, text);
    art.figure_files.push_back(rel);
  };
  const std::string config_text = to_json(config);
  write_data("config.json", config_text);

  std::string series = "epoch,step,d_subsequent,d_to_invariant\n";
  for (const auto& p : art.series)
    series += csv_row({std::to_string(p.epoch), std::to_string(p.step), format_number(p.d_subsequent),
                       format_number(p.d_to_invariant)});
  write_data("distance_series.csv", series);

  std::string probes = "epoch,step,resample,d_to_invariant\n";
  for (const auto& p : art.probes)
    probes += csv_row({std::to_string(p.epoch), std::to_string(p.step), std::to_string(p.resample),
                       format_number(p.d_to_invariant)});
  write_data("subsample_error.csv", probes);

  std::string traj = "epoch,step";
  for (std::size_t c = 0; c < d; ++c) traj += fmt::format(",x{}", c);
  traj += '\n';
  for (std::size_t k = 0; k < art.trajectories.size(); ++k) {
    const auto& t = art.trajectories[k];
    for (std::size_t s = 0; s * d < t.size(); ++s) {
      traj += std::to_string(k) + ',' + std::to_string(s + 1);
      for (std::size_t c = 0; c < d; ++c) traj += ',' + format_number(t[s * d + c]);
      traj += '\n';
    }
  }
  write_data("trajectory.csv", traj);

  for (std::size_t k = 0; k < epochs.size(); ++k) {
    const std::string cloud_name = fmt::format("cloud_epoch{}.csv", k);
    write_cloud_table(out / cloud_name, art.final_clouds[k]);
    art.data_files.push_back(cloud_name);
    const std::string inv_name = fmt::format("invariant_epoch{}.csv", k);
    write_measure_table(out / inv_name, art.invariants[k].measure);
    art.data_files.push_back(inv_name);
  }
  write_data("invariants.json", invariants_json(art.invariants, art.reference_errors));
  write_data("bounds.json", to_json(art.bounds.report));
  write_data("bounds.txt", to_table(art.bounds.report));

  // Histograms (always) and figures (optional) for planar runs.
  const bool figures = options.figures && config.figures.enabled;
  if (d == 2 && !epochs.empty()) {
    const PlotBounds pb = config.figures.bounds ? *config.figures.bounds : fitted_bounds(art.trajectories);
    const HistogramGrid grid{pb[0], pb[1], pb[2], pb[3], config.figures.bins, config.figures.bins};
    std::vector<ScatterLayer> layers;
    for (std::size_t k = 0; k < epochs.size(); ++k) {
      const auto& t = art.trajectories[k];
      ParticleCloud path(2, t, k, t.size() / 2);
      const auto masses = histogram_density(path, grid);
      std::string hist = fmt::format("# x_min={},x_max={},y_min={},y_max={},bins_x={},bins_y={}; rows are y bins from y_min\n",
                                     format_number(grid.x_min), format_number(grid.x_max),
                                     format_number(grid.y_min), format_number(grid.y_max),
                                     grid.bins_x, grid.bins_y);
      for (std::size_t iy = 0; iy < grid.bins_y; ++iy) {
        for (std::size_t ix = 0; ix < grid.bins_x; ++ix) {
          if (ix) hist += ',';
          hist += format_number(masses[iy * grid.bins_x + ix]);
        }
        hist += '\n';
      }
      write_data(fmt::format("histogram_epoch{}.csv", k), hist);
      layers.push_back({fmt::format("epoch {}", k), colour(k), t});
      if (figures) {
        write_figure(fmt::format("support_epoch{}.svg", k),
                     scatter_svg(std::span(&layers.back(), 1), pb, fmt::format("Support, epoch {}", k)));
        write_figure(fmt::format("histogram_epoch{}.svg", k),
                     heatmap_svg(masses, grid, fmt::format("Histogram, epoch {}", k)));
      }
    }
    if (figures) write_figure("support_all.svg", scatter_svg(layers, pb, "Support, all epochs"));
  }
  if (figures && !epochs.empty()) {
    std::vector<LineSeries> sub, inv;
    std::size_t offset = 0;
    for (std::size_t k = 0; k < epochs.size(); ++k) {
      LineSeries a{fmt::format("epoch {}", k), colour(k), {}, {}};
      LineSeries b = a;
      for (const auto& p : art.series) {
        if (p.epoch != k) continue;
        a.x.push_back(static_cast<double>(offset + p.step));
        a.y.push_back(p.d_subsequent);
        b.x.push_back(static_cast<double>(offset + p.step));
        b.y.push_back(p.d_to_invariant);
      }
      offset += epochs[k].length;
      sub.push_back(std::move(a));
      inv.push_back(std::move(b));
    }
    write_figure("distance_subsequent.svg",
                 line_plot_svg(sub, "Distance between subsequent measures", "step", "W1", true));
    write_figure("distance_invariant.svg",
                 line_plot_svg(inv, "Distance to the invariant measure", "step", "W1", true));
  }

  Manifest manifest;
  manifest.version = library_version();
  manifest.seed = config.seed;
  manifest.config_sha256 = sha256_hex(config_text);
  manifest.data = hash_files(out, art.data_files);
  manifest.figures = hash_files(out, art.figure_files);
  write_text_file(out / "manifest.json", to_json(manifest));
  return art;
}

BoundsAnalysis analyze_run(const std::filesystem::path& run_dir) {
  const ExperimentConfig config = load_config(run_dir / "config.json");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(run_dir / "invariants.json"));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("invariants.json: ") + e.what());
  }
  std::vector<EpochInvariant> invariants;
  try {
    for (const auto& e : j)
      invariants.push_back({read_measure_table(run_dir / e.at("table").get<std::string>()),
                            e.at("contraction").get<double>(), e.at("residual").get<double>(),
                            e.at("certificate").get<double>(), e.at("resolution").get<double>(),
                            e.at("iterations").get<std::size_t>()});
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("invariants.json: ") + e.what());
  }
  return compute_bounds(config, invariants);
}

}  // namespace pwifs
