// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

// pwifs: run, analyze and inspect piecewise-stationary IFS experiments.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "pwifs/bounds.hpp"
#include "pwifs/config.hpp"
#include "pwifs/error.hpp"
#include "pwifs/experiment.hpp"
#include "pwifs/table_io.hpp"
#include "pwifs/transport.hpp"

namespace {

enum Exit : int { kOk = 0, kInvalid = 1, kConvergence = 2, kIo = 3 };

int run_command(const std::string& config_path, std::optional<std::uint64_t> seed,
                const std::string& out, std::size_t threads, bool no_figures, bool quiet) {
  const pwifs::ExperimentConfig config = pwifs::load_config(config_path);
  pwifs::RunOptions options;
  options.output_dir = out;
  options.threads = threads;
  options.figures = !no_figures;
  options.seed = seed;
  if (!quiet) options.log = [](const std::string& line) { std::cerr << line << '\n'; };
  const pwifs::RunArtifacts art = pwifs::run_experiment(config, options);
  std::cout << pwifs::to_table(art.bounds.report);
  std::cout << fmt::format("\nwrote {} data files and {} figures to {}\n", art.data_files.size(),
                           art.figure_files.size(), art.output_dir.string());
  return art.bounds.report.all_satisfied() ? kOk : kInvalid;
}

int analyze_command(const std::string& dir, const std::string& format) {
  const pwifs::BoundsAnalysis analysis = pwifs::analyze_run(dir);
  if (format != "json") std::cout << pwifs::to_table(analysis.report);
  if (format == "both") std::cout << '\n';
  if (format != "table") std::cout << pwifs::to_json(analysis.report);
  return analysis.report.all_satisfied() ? kOk : kInvalid;
}

int distances_command(const std::string& a_path, const std::string& b_path,
                      const std::string& method, double alpha) {
  const auto a = pwifs::read_measure_table(a_path);
  const auto b = pwifs::read_measure_table(b_path);
  const pwifs::GroundCost cost{alpha};
  cost.validate();
  nlohmann::ordered_json out;
  std::string used = method;
  if (used == "auto") {
    if (a.dimension() == 1 && b.dimension() == 1) used = "1d";
    else if (a.size() + b.size() <= pwifs::ExactOptions{}.max_atoms) used = "exact";
    else used = "interval";
  }
  double distance = 0.0;
  nlohmann::ordered_json cert;
  if (used == "1d") {
    distance = pwifs::wasserstein_1d(a, b, alpha);
    cert = {{"kind", "closed form"}};
  } else if (used == "exact") {
    const auto t = pwifs::wasserstein_exact(a, b, cost);
    distance = t.distance;
    cert = {{"kind", "dual"},
            {"duality_gap", t.certificate.duality_gap},
            {"marginal_violation", t.certificate.marginal_violation},
            {"dual_violation", t.certificate.dual_violation},
            {"passed", t.certificate.passed}};
  } else if (used == "sinkhorn") {
    const auto s = pwifs::sinkhorn(a, b, cost);
    distance = s.distance;
    cert = {{"kind", "entropic"},
            {"lower", s.lower},
            {"upper", s.upper},
            {"error_bound", s.error_bound},
            {"epsilon", s.epsilon},
            {"iterations", s.iterations}};
  } else if (used == "interval") {
    const auto iv = pwifs::wasserstein_interval(a, b, cost);
    distance = iv.upper;
    cert = {{"kind", "interval"}, {"lower", iv.lower}, {"upper", iv.upper}, {"exact", iv.exact}};
  } else {
    throw pwifs::InvalidInput("unknown method '" + method + "'");
  }
  out["distance"] = distance;
  out["method"] = used;
  out["certificate"] = cert;
  std::cout << pwifs::format_number(distance) << '\n' << out.dump() << '\n';
  return kOk;
}

int validate_command(const std::string& config_path) {
  const pwifs::ExperimentConfig config = pwifs::load_config(config_path);
  const auto v = pwifs::validate_schedule(config.schedule);
  bool ok = v.passed;
  for (const auto& s : v.steps)
    std::cout << fmt::format("tv[{}->{}] = {} {}\n", s.from_epoch, s.from_epoch + 1,
                             pwifs::format_number(s.distance),
                             s.exceeds_bound ? "exceeds e" : "ok");
  for (std::size_t k = 0; k < config.schedule.size(); ++k) {
    const double r = pwifs::contraction_factor(config.family, config.schedule.epochs()[k].measure);
    ok = ok && r < 1.0;
    std::cout << fmt::format("r[{}] = {:.6f} {}\n", k, r, r < 1.0 ? "contractive" : "NOT contractive");
  }
  std::cout << fmt::format("e = {}: {}\n", pwifs::format_number(config.schedule.tv_bound()),
                           ok ? "valid" : "invalid");
  return ok ? kOk : kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Piecewise-stationary iterated function systems"};
  app.set_version_flag("--version", pwifs::library_version());
  app.require_subcommand(1);

  std::string config_path, out, format = "table", method = "auto", a_path, b_path, run_dir;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  bool no_figures = false, quiet = false;
  double alpha = 1.0;

  auto* run = app.add_subcommand("run", "Simulate every epoch and write data, figures and bounds");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out, "Output directory (default: config output_dir)");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--no-figures", no_figures, "Skip SVG output");
  run->add_flag("--quiet", quiet, "No progress lines on stderr");

  auto* analyze = app.add_subcommand("analyze", "Recompute bounds for a finished run");
  analyze->add_option("dir", run_dir, "Run output directory")->required()->check(CLI::ExistingDirectory);
  analyze->add_option("--format", format, "table, json or both")
      ->check(CLI::IsMember({"table", "json", "both"}));

  auto* distances = app.add_subcommand("distances", "Wasserstein distance between two measure tables");
  distances->add_option("a", a_path, "First measure (CSV)")->required()->check(CLI::ExistingFile);
  distances->add_option("b", b_path, "Second measure (CSV)")->required()->check(CLI::ExistingFile);
  distances->add_option("--method", method, "auto, exact, sinkhorn, interval or 1d")
      ->check(CLI::IsMember({"auto", "exact", "sinkhorn", "interval", "1d"}));
  distances->add_option("--alpha", alpha, "Ground cost |x - y|^alpha, 0 < alpha <= 1");

  auto* validate = app.add_subcommand("validate", "Check a config and its slow-change condition");
  validate->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*run) return run_command(config_path, seed, out, threads, no_figures, quiet);
    if (*analyze) return analyze_command(run_dir, format);
    if (*distances) return distances_command(a_path, b_path, method, alpha);
    if (*validate) return validate_command(config_path);
  } catch (const pwifs::ConvergenceFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConvergence;
  } catch (const pwifs::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kInvalid;
}
