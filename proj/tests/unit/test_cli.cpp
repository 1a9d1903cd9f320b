// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include <doctest.h>

#include "pwifs/config.hpp"
#include "pwifs/error.hpp"
#include "pwifs/experiment.hpp"
#include "pwifs/figures.hpp"
#include "pwifs/manifest.hpp"
#include "pwifs/table_io.hpp"

using namespace pwifs;
namespace fs = std::filesystem;

namespace {

std::string small_config(const std::string& epochs = R"([{"weights": [0.23, 0.22, 0.22, 0.33], "length": 300},
                                                        {"weights": [0.5, 0.2, 0.2, 0.1], "length": 200}])") {
  return R"({
    "schema_version": 1,
    "seed": 42,
    "maps": [
      {"matrix": [0.8, 0.0, 0.0, 0.8], "offset": [0.1, 0.04]},
      {"matrix": [0.5, 0.0, 0.0, 0.5], "offset": [0.25, 0.4]},
      {"matrix": [0.355, 0.355, 0.355, -0.355], "offset": [0.266, 0.078]},
      {"matrix": [0.355, -0.355, -0.355, -0.355], "offset": [0.378, 0.434]}
    ],
    "schedule": {"tv_bound": 0.6, "epochs": )" +
         epochs + R"(},
    "particles": 300,
    "invariant": {"tol": 0.05, "resolution": 0.02},
    "prune": {"merge_resolution": 0.02},
    "distances": {"cadence": 50, "dense_prefix": 4, "subsample": 60, "resamples": 2,
                  "error_cadence": 100, "reference_atoms": 60},
    "bounds": {"regret_steps": 2},
    "figures": {"bins": 16}
  })";
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pwifs_unit_" + name);
  fs::remove_all(p);
  return p;
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(PWIFS_TOOL_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parses and round-trips canonically") {
  const ExperimentConfig cfg = parse_config(small_config());
  CHECK(cfg.seed == 42);
  CHECK(cfg.family.size() == 4);
  CHECK(cfg.schedule.size() == 2);
  CHECK(cfg.particles == 300);
  CHECK(cfg.start_point == std::vector<double>{0.0, 0.0});
  CHECK(cfg.distances.cadence == 50);
  CHECK(cfg.prune.max_atoms == 100000);
  const std::string canonical = to_json(cfg);
  CHECK(to_json(parse_config(canonical)) == canonical);
}

TEST_CASE("the shipped config is valid") {
  const ExperimentConfig cfg = load_config(PWIFS_SOURCE_DIR "/configs/maple_leaf.json");
  CHECK(cfg.schedule.size() == 3);
  CHECK(cfg.schedule.epochs()[0].length == 30000);
  CHECK(validate_schedule(cfg.schedule).passed);
}

TEST_CASE("config rejects unknown keys, bad types and broken invariants") {
  auto message = [](const std::string& text) -> std::string {
    try {
      parse_config(text);
    } catch (const InvalidInput& e) {
      return e.what();
    }
    return "";
  };
  std::string text = small_config();
  const std::string extra = text.substr(0, text.rfind('}')) + R"(, "colour": "red"})";
  CHECK(message(extra).find("colour") != std::string::npos);
  std::string nested = text;
  nested.replace(nested.find("\"tol\""), 5, "\"tolerance\"");
  CHECK(message(nested).find("invariant") != std::string::npos);
  std::string typed = text;
  typed.replace(typed.find("\"particles\": 300"), 16, "\"particles\": \"many\"");
  CHECK(message(typed).find("particles") != std::string::npos);
  std::string version = text;
  version.replace(version.find("\"schema_version\": 1"), 19, "\"schema_version\": 2");
  CHECK(message(version).find("schema_version") != std::string::npos);
  CHECK_FALSE(message(small_config(R"([{"weights": [0.5, 0.6, 0.0, 0.0], "length": 3}])")).empty());
  CHECK_FALSE(message(small_config(R"([{"weights": [0.5, 0.5], "length": 3}])")).empty());
  CHECK_FALSE(message("{not json").empty());
  std::string matrix = text;
  matrix.replace(matrix.find("[0.8, 0.0, 0.0, 0.8]"), 20, "[0.8, 0.0, 0.0]");
  CHECK(message(matrix).find("maps[0]") != std::string::npos);
}

TEST_CASE("measure and cloud tables round-trip exactly") {
  const fs::path dir = scratch("tables");
  const DiscreteMeasure m(2, {0.1, 1.0 / 3.0, -2.5e-17, 7.0}, {0.25, 0.75});
  write_measure_table(dir / "m.csv", m);
  const DiscreteMeasure back = read_measure_table(dir / "m.csv");
  CHECK(std::vector<double>(back.coords().begin(), back.coords().end()) ==
        std::vector<double>(m.coords().begin(), m.coords().end()));
  CHECK(back.weight(1) == 0.75);
  const ParticleCloud c(2, {1.0, 2.0, 3.0, 4.0});
  write_cloud_table(dir / "c.csv", c);
  CHECK(read_cloud_table(dir / "c.csv").coords().size() == 4);
  write_text_file(dir / "bad.csv", "x0,weight\n1,abc\n");
  CHECK_THROWS_AS(read_measure_table(dir / "bad.csv"), InvalidInput);
  CHECK_THROWS_AS(read_text_file(dir / "missing.csv"), IoError);
}

TEST_CASE("sha256 and manifest") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const fs::path dir = scratch("manifest");
  write_text_file(dir / "b.txt", "b");
  write_text_file(dir / "a.txt", "abc");
  const auto entries = hash_files(dir, {"b.txt", "a.txt"});
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].path == "a.txt");
  CHECK(entries[0].bytes == 3);
  Manifest m;
  m.version = "1";
  m.data = entries;
  const std::string json = to_json(m);
  CHECK(to_json(parse_manifest(json)) == json);
}

TEST_CASE("figures are well-formed SVG") {
  const std::vector<double> xy{0.0, 0.0, 0.5, 0.5, 0.5, 0.5, 2.0, 2.0};
  const ScatterLayer layer{"a", "red", xy};
  const std::string svg = scatter_svg(std::span(&layer, 1), {0, 1, 0, 1}, "t", 10);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  // Two distinct in-window pixels; the duplicate and the outlier are not drawn.
  std::size_t rects = 0;
  for (std::size_t p = svg.find("width=\"1\""); p != std::string::npos; p = svg.find("width=\"1\"", p + 1)) ++rects;
  CHECK(rects == 2);
  const std::vector<double> masses{0.5, 0.0, 0.25, 0.25};
  CHECK(heatmap_svg(masses, {0, 1, 0, 1, 2, 2}, "h").find("<rect") != std::string::npos);
  CHECK_THROWS_AS(heatmap_svg(masses, {0, 1, 0, 1, 3, 2}, "h"), InvalidInput);
  const std::vector<LineSeries> lines{{"s", "blue", {1, 2, 3}, {1.0, 0.1, 0.01}}};
  CHECK(line_plot_svg(lines, "l", "x", "y", true).find("<polyline") != std::string::npos);
}

TEST_CASE("zero-epoch run writes an empty but valid manifest") {
  const fs::path dir = scratch("empty");
  RunOptions opts;
  opts.output_dir = dir;
  const RunArtifacts art = run_experiment(parse_config(small_config("[]")), opts);
  CHECK(art.final_clouds.empty());
  CHECK(art.series.empty());
  CHECK(art.figure_files.empty());
  const Manifest m = parse_manifest(read_text_file(dir / "manifest.json"));
  CHECK(m.figures.empty());
  for (const auto& e : m.data) CHECK(sha256_file(dir / e.path) == e.sha256);
}

TEST_CASE("small run: handoff, reproducibility and manifest") {
  const ExperimentConfig cfg = parse_config(small_config());
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  RunOptions opts;
  opts.output_dir = a;
  const RunArtifacts first = run_experiment(cfg, opts);
  opts.output_dir = b;
  opts.threads = 3;
  const RunArtifacts second = run_experiment(cfg, opts);

  REQUIRE(first.final_clouds.size() == 2);
  CHECK(first.first_clouds[1].coords().size() == first.final_clouds[0].coords().size());
  CHECK(std::equal(first.first_clouds[1].coords().begin(), first.first_clouds[1].coords().end(),
                   first.final_clouds[0].coords().begin()));
  CHECK(first.trajectories[0].size() == 300 * 2);
  CHECK(first.trajectories[1].size() == 200 * 2);

  const Manifest ma = parse_manifest(read_text_file(a / "manifest.json"));
  const Manifest mb = parse_manifest(read_text_file(b / "manifest.json"));
  CHECK(to_json(ma) == to_json(mb));
  CHECK(read_text_file(a / "manifest.json") == read_text_file(b / "manifest.json"));
  for (const auto& e : ma.data) CHECK(sha256_file(a / e.path) == e.sha256);
  for (const auto& e : ma.figures) CHECK(sha256_file(a / e.path) == e.sha256);
  CHECK(ma.figures.size() == 7);

  // Series rows: every step up to the dense prefix, then the cadence, then the last step.
  std::vector<std::size_t> steps;
  for (const auto& p : first.series)
    if (p.epoch == 1) steps.push_back(p.step);
  CHECK(steps == std::vector<std::size_t>{1, 2, 3, 4, 50, 100, 150, 200});
  CHECK(read_numeric_rows(a / "distance_series.csv").size() == first.series.size());

  // Histograms hold at most unit mass.
  for (std::size_t k = 0; k < 2; ++k) {
    double total = 0.0;
    for (const auto& row : read_numeric_rows(a / ("histogram_epoch" + std::to_string(k) + ".csv")))
      for (double v : row) total += v;
    CHECK(total <= 1.0 + 1e-12);
  }

  const BoundsAnalysis again = analyze_run(a);
  CHECK(to_json(again.report) == to_json(first.bounds.report));

  opts.output_dir = scratch("run_c");
  opts.seed = 43;
  opts.figures = false;
  const RunArtifacts third = run_experiment(cfg, opts);
  CHECK(third.figure_files.empty());
  CHECK_FALSE(third.final_clouds[1] == first.final_clouds[1]);
}

TEST_CASE("run errors carry epoch context") {
  ExperimentConfig cfg = parse_config(small_config());
  cfg.invariant.max_iter = 1;
  cfg.invariant.tol = 1e-9;
  RunOptions opts;
  opts.output_dir = scratch("fail");
  try {
    run_experiment(cfg, opts);
    FAIL("expected ConvergenceFailure");
  } catch (const ConvergenceFailure& e) {
    CHECK(std::string(e.what()).find("epoch 0") != std::string::npos);
  }
}

TEST_CASE("command-line exit codes") {
  const fs::path dir = scratch("cli");
  write_text_file(dir / "good.json", small_config());
  write_text_file(dir / "bad.json", "{\"schema_version\": 1, \"oops\": true}");
  std::string tight = small_config();
  tight.replace(tight.find("\"tv_bound\": 0.6"), 15, "\"tv_bound\": 0.1");
  write_text_file(dir / "tight.json", tight);
  std::string stiff = small_config();
  stiff.replace(stiff.find("\"tol\": 0.05"), 11, "\"tol\": 1e-12");
  stiff.replace(stiff.find("\"particles\": 300"), 16, "\"particles\": 300, \"start_point\": [1, 1]");
  write_text_file(dir / "stiff.json", stiff.substr(0, stiff.find("\"invariant\"")) +
                                          R"("invariant": {"tol": 1e-12, "max_iter": 2, "resolution": 0.02},)" +
                                          stiff.substr(stiff.find("\"prune\"")));

  CHECK(run_tool("validate --config " + (dir / "good.json").string()) == 0);
  CHECK(run_tool("validate --config " + (dir / "bad.json").string()) == 1);
  CHECK(run_tool("validate --config " + (dir / "tight.json").string()) == 1);
  CHECK(run_tool("run --config " + (dir / "stiff.json").string() + " --out " + (dir / "o").string()) == 2);
  write_text_file(dir / "blocker", "");
  CHECK(run_tool("run --config " + (dir / "good.json").string() + " --out " + (dir / "blocker" / "x").string()) == 3);
  CHECK(run_tool("frobnicate") == 1);

  write_text_file(dir / "a.csv", "x0,weight\n0,0.5\n1,0.5\n");
  write_text_file(dir / "b.csv", "x0,weight\n0.5,1\n");
  const std::string out = (dir / "d.txt").string();
  CHECK(std::system((std::string(PWIFS_TOOL_PATH) + " distances --method exact " + (dir / "a.csv").string() + " " +
                     (dir / "b.csv").string() + " > " + out)
                        .c_str()) == 0);
  const std::string text = read_text_file(out);
  CHECK(text.rfind("0.5\n", 0) == 0);
  CHECK(text.find("\"method\":\"exact\"") != std::string::npos);
}
