// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwifs/config.hpp"

#include <cmath>
#include <set>
#include <string>

#include "json.hpp"
#include "pwifs/error.hpp"
#include "pwifs/table_io.hpp"

namespace pwifs {
namespace {

using Json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw InvalidInput("config: " + where + ": " + what);
}

void only_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items())
    if (!ok.count(item.key())) fail(where, "unknown key '" + item.key() + "'");
}

const Json& required(const Json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) fail(where, "missing key '" + std::string(key) + "'");
  return j.at(key);
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "expected a finite number");
  return v;
}

std::size_t count(const Json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    fail(where, "expected a non-negative integer");
  return j.get<std::size_t>();
}

std::vector<double> numbers(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

template <typename T, typename Fn>
void optional_field(const Json& j, const char* key, const std::string& where, T& target, Fn&& convert) {
  if (j.contains(key)) target = convert(j.at(key), where + "." + key);
}

MapFamily parse_maps(const Json& j, std::optional<std::size_t> dimension) {
  if (!j.is_array() || j.empty()) fail("maps", "expected a non-empty array");
  std::vector<LipschitzMap> maps;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string where = "maps[" + std::to_string(k) + "]";
    only_keys(j[k], where, {"matrix", "offset"});
    const auto matrix = numbers(required(j[k], where, "matrix"), where + ".matrix");
    const auto offset = numbers(required(j[k], where, "offset"), where + ".offset");
    if (offset.empty()) fail(where, "offset must be non-empty");
    if (matrix.size() != offset.size() * offset.size())
      fail(where, "matrix must have d*d = " + std::to_string(offset.size() * offset.size()) +
                      " entries in row-major order");
    if (dimension && offset.size() != *dimension)
      fail(where, "dimension " + std::to_string(offset.size()) + " differs from declared " +
                      std::to_string(*dimension));
    try {
      maps.emplace_back(AffineMap::from_row_major(matrix, offset));
    } catch (const InvalidInput& e) {
      fail(where, e.what());
    }
  }
  try {
    return MapFamily(std::move(maps));
  } catch (const InvalidInput& e) {
    fail("maps", e.what());
  }
}

Schedule parse_schedule(const Json& j) {
  only_keys(j, "schedule", {"tv_bound", "epochs"});
  const double e = number(required(j, "schedule", "tv_bound"), "schedule.tv_bound");
  const Json& epochs = required(j, "schedule", "epochs");
  if (!epochs.is_array()) fail("schedule.epochs", "expected an array");
  std::vector<Epoch> list;
  for (std::size_t k = 0; k < epochs.size(); ++k) {
    const std::string where = "schedule.epochs[" + std::to_string(k) + "]";
    only_keys(epochs[k], where, {"weights", "length"});
    auto weights = numbers(required(epochs[k], where, "weights"), where + ".weights");
    const std::size_t length = count(required(epochs[k], where, "length"), where + ".length");
    try {
      list.push_back({SamplingMeasure(std::move(weights)), length});
    } catch (const InvalidInput& ex) {
      fail(where, ex.what());
    }
  }
  try {
    return Schedule(std::move(list), e);
  } catch (const InvalidInput& ex) {
    fail("schedule", ex.what());
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw InvalidInput(std::string("config: malformed JSON: ") + e.what());
  }
  only_keys(j, "config",
            {"schema_version", "seed", "dimension", "maps", "schedule", "particles", "start_point",
             "prune", "invariant", "distances", "bounds", "figures", "output_dir"});

  const Json& version = required(j, "config", "schema_version");
  if (!version.is_number_integer() || version.get<int>() != kConfigSchemaVersion)
    fail("schema_version", "expected " + std::to_string(kConfigSchemaVersion));

  std::optional<std::size_t> dimension;
  if (j.contains("dimension")) dimension = count(j["dimension"], "dimension");
  if (dimension && *dimension == 0) fail("dimension", "must be positive");

  const Json& seed = required(j, "config", "seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0))
    fail("seed", "expected a non-negative 64-bit integer");

  ExperimentConfig cfg{kConfigSchemaVersion,
                       seed.get<std::uint64_t>(),
                       parse_maps(required(j, "config", "maps"), dimension),
                       parse_schedule(required(j, "config", "schedule")),
                       2000,
                       {},
                       {},
                       {},
                       {},
                       {},
                       {},
                       "out"};
  try {
    check_compatible(cfg.schedule, cfg.family);
  } catch (const InvalidInput& e) {
    fail("schedule", e.what());
  }

  optional_field(j, "particles", "config", cfg.particles, count);
  if (cfg.particles == 0) fail("particles", "must be at least 1");
  cfg.start_point.assign(cfg.family.dimension(), 0.0);
  optional_field(j, "start_point", "config", cfg.start_point, numbers);
  if (cfg.start_point.size() != cfg.family.dimension()) fail("start_point", "wrong dimension");

  if (j.contains("prune")) {
    const Json& p = j["prune"];
    only_keys(p, "prune", {"merge_resolution", "max_atoms"});
    optional_field(p, "merge_resolution", "prune", cfg.prune.merge_resolution, number);
    optional_field(p, "max_atoms", "prune", cfg.prune.max_atoms, count);
    if (cfg.prune.merge_resolution < 0.0) fail("prune.merge_resolution", "must be >= 0");
  }
  if (j.contains("invariant")) {
    const Json& p = j["invariant"];
    only_keys(p, "invariant", {"tol", "max_iter", "resolution", "max_atoms"});
    optional_field(p, "tol", "invariant", cfg.invariant.tol, number);
    optional_field(p, "max_iter", "invariant", cfg.invariant.max_iter, count);
    optional_field(p, "resolution", "invariant", cfg.invariant.resolution, number);
    optional_field(p, "max_atoms", "invariant", cfg.invariant.max_atoms, count);
    if (!(cfg.invariant.tol > 0.0)) fail("invariant.tol", "must be positive");
    if (cfg.invariant.resolution < 0.0) fail("invariant.resolution", "must be >= 0");
  }
  if (j.contains("distances")) {
    const Json& p = j["distances"];
    only_keys(p, "distances",
              {"cadence", "dense_prefix", "subsample", "resamples", "error_cadence",
               "reference_atoms", "exact_cap"});
    auto& d = cfg.distances;
    optional_field(p, "cadence", "distances", d.cadence, count);
    optional_field(p, "dense_prefix", "distances", d.dense_prefix, count);
    optional_field(p, "subsample", "distances", d.subsample, count);
    optional_field(p, "resamples", "distances", d.resamples, count);
    optional_field(p, "error_cadence", "distances", d.error_cadence, count);
    optional_field(p, "reference_atoms", "distances", d.reference_atoms, count);
    optional_field(p, "exact_cap", "distances", d.exact_cap, count);
    if (d.cadence == 0) fail("distances.cadence", "must be at least 1");
    if (d.subsample == 0) fail("distances.subsample", "must be at least 1");
    if (d.reference_atoms == 0) fail("distances.reference_atoms", "must be at least 1");
    if (d.subsample + d.reference_atoms > d.exact_cap)
      fail("distances", "subsample + reference_atoms exceeds exact_cap");
  }
  if (j.contains("bounds")) {
    const Json& p = j["bounds"];
    only_keys(p, "bounds", {"map_drift", "regret_steps"});
    optional_field(p, "map_drift", "bounds", cfg.bounds.map_drift, number);
    optional_field(p, "regret_steps", "bounds", cfg.bounds.regret_steps, count);
    if (cfg.bounds.map_drift < 0.0) fail("bounds.map_drift", "must be >= 0");
    if (cfg.bounds.regret_steps == 0) fail("bounds.regret_steps", "must be at least 1");
  }
  if (j.contains("figures")) {
    const Json& p = j["figures"];
    only_keys(p, "figures", {"enabled", "bins", "bounds"});
    if (p.contains("enabled")) {
      if (!p["enabled"].is_boolean()) fail("figures.enabled", "expected true or false");
      cfg.figures.enabled = p["enabled"].get<bool>();
    }
    optional_field(p, "bins", "figures", cfg.figures.bins, count);
    if (cfg.figures.bins == 0) fail("figures.bins", "must be at least 1");
    if (p.contains("bounds") && !p["bounds"].is_null()) {
      const auto b = numbers(p["bounds"], "figures.bounds");
      if (b.size() != 4 || !(b[1] > b[0]) || !(b[3] > b[2]))
        fail("figures.bounds", "expected [x_min, x_max, y_min, y_max] with max > min");
      cfg.figures.bounds = std::array<double, 4>{b[0], b[1], b[2], b[3]};
    }
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) fail("output_dir", "expected a string");
    cfg.output_dir = j["output_dir"].get<std::string>();
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text_file(path));
}

std::string to_json(const ExperimentConfig& config) {
  nlohmann::ordered_json j;
  j["schema_version"] = config.schema_version;
  j["seed"] = config.seed;
  j["dimension"] = config.family.dimension();
  j["maps"] = nlohmann::ordered_json::array();
  for (const auto& map : config.family.maps()) {
    const auto* affine = std::get_if<AffineMap>(&map);
    if (!affine) throw InvalidInput("to_json: only affine maps can be written to a config");
    std::vector<double> matrix;
    for (Eigen::Index r = 0; r < affine->matrix().rows(); ++r)
      for (Eigen::Index c = 0; c < affine->matrix().cols(); ++c) matrix.push_back(affine->matrix()(r, c));
    std::vector<double> offset(affine->offset().data(), affine->offset().data() + affine->offset().size());
    j["maps"].push_back({{"matrix", matrix}, {"offset", offset}});
  }
  j["schedule"]["tv_bound"] = config.schedule.tv_bound();
  j["schedule"]["epochs"] = nlohmann::ordered_json::array();
  for (const auto& epoch : config.schedule.epochs())
    j["schedule"]["epochs"].push_back(
        {{"weights", std::vector<double>(epoch.measure.weights().begin(), epoch.measure.weights().end())},
         {"length", epoch.length}});
  j["particles"] = config.particles;
  j["start_point"] = config.start_point;
  j["prune"] = {{"merge_resolution", config.prune.merge_resolution},
                {"max_atoms", config.prune.max_atoms}};
  j["invariant"] = {{"tol", config.invariant.tol},
                    {"max_iter", config.invariant.max_iter},
                    {"resolution", config.invariant.resolution},
                    {"max_atoms", config.invariant.max_atoms}};
  const auto& d = config.distances;
  j["distances"] = {{"cadence", d.cadence},         {"dense_prefix", d.dense_prefix},
                    {"subsample", d.subsample},     {"resamples", d.resamples},
                    {"error_cadence", d.error_cadence}, {"reference_atoms", d.reference_atoms},
                    {"exact_cap", d.exact_cap}};
  j["bounds"] = {{"map_drift", config.bounds.map_drift},
                 {"regret_steps", config.bounds.regret_steps}};
  j["figures"]["enabled"] = config.figures.enabled;
  j["figures"]["bins"] = config.figures.bins;
  if (config.figures.bounds)
    j["figures"]["bounds"] = std::vector<double>(config.figures.bounds->begin(), config.figures.bounds->end());
  else
    j["figures"]["bounds"] = nullptr;
  j["output_dir"] = config.output_dir;
  return j.dump(2) + "\n";
}

}  // namespace pwifs
