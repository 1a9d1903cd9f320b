// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwifs/table_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "pwifs/error.hpp"

namespace pwifs {

std::string format_number(double value) { return fmt::format("{}", value); }

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

bool parse_row(std::string_view line, std::vector<double>& row) {
  row.clear();
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t end = line.find(',', pos);
    if (end == std::string_view::npos) end = line.size();
    std::string_view field = line.substr(pos, end - pos);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
      field.remove_suffix(1);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) return false;
    row.push_back(v);
    pos = end + 1;
  }
  return true;
}

}  // namespace

std::vector<std::vector<double>> read_numeric_rows(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::vector<double> row;
  std::size_t lineno = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#')
      continue;
    if (!parse_row(line, row)) {
      if (!seen_data && rows.empty()) {
        seen_data = true;  // header
        continue;
      }
      throw InvalidInput(path.string() + ":" + std::to_string(lineno) + ": not a numeric row");
    }
    seen_data = true;
    if (!rows.empty() && row.size() != rows.front().size())
      throw InvalidInput(path.string() + ":" + std::to_string(lineno) + ": expected " +
                         std::to_string(rows.front().size()) + " columns");
    rows.push_back(row);
  }
  if (rows.empty()) throw InvalidInput(path.string() + ": no data rows");
  return rows;
}

void write_measure_table(const std::filesystem::path& path, const DiscreteMeasure& measure) {
  std::string text;
  for (std::size_t c = 0; c < measure.dimension(); ++c) text += fmt::format("x{},", c);
  text += "weight\n";
  for (std::size_t i = 0; i < measure.size(); ++i) {
    for (double v : measure.point(i)) {
      text += format_number(v);
      text += ',';
    }
    text += format_number(measure.weight(i));
    text += '\n';
  }
  write_text_file(path, text);
}

DiscreteMeasure read_measure_table(const std::filesystem::path& path) {
  const auto rows = read_numeric_rows(path);
  const std::size_t width = rows.front().size();
  if (width < 2) throw InvalidInput(path.string() + ": need coordinate and weight columns");
  const std::size_t d = width - 1;
  std::vector<double> coords, weights;
  coords.reserve(rows.size() * d);
  for (const auto& r : rows) {
    coords.insert(coords.end(), r.begin(), r.end() - 1);
    weights.push_back(r.back());
  }
  // Stored weights are kept bit-for-bit when they already sum to one.
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) <= 1e-9) return DiscreteMeasure(d, std::move(coords), std::move(weights));
  return DiscreteMeasure::normalized(d, std::move(coords), std::move(weights));
}

void write_cloud_table(const std::filesystem::path& path, const ParticleCloud& cloud) {
  std::string text;
  for (std::size_t c = 0; c < cloud.dimension(); ++c)
    text += fmt::format("{}x{}", c ? "," : "", c);
  text += '\n';
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    for (std::size_t c = 0; c < p.size(); ++c) {
      if (c) text += ',';
      text += format_number(p[c]);
    }
    text += '\n';
  }
  write_text_file(path, text);
}

ParticleCloud read_cloud_table(const std::filesystem::path& path) {
  const auto rows = read_numeric_rows(path);
  const std::size_t d = rows.front().size();
  std::vector<double> coords;
  coords.reserve(rows.size() * d);
  for (const auto& r : rows) coords.insert(coords.end(), r.begin(), r.end());
  return ParticleCloud(d, std::move(coords));
}

}  // namespace pwifs
