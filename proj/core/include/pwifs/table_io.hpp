// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pwifs/discrete_measure.hpp"
#include "pwifs/particles.hpp"

namespace pwifs {

/// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

/// Measure tables are CSV: a header `x0,...,x{d-1},weight` and one row per
/// atom. Readers skip blank lines, `#` comments and a non-numeric header,
/// and rescale weights to unit mass.
void write_measure_table(const std::filesystem::path& path, const DiscreteMeasure& measure);
DiscreteMeasure read_measure_table(const std::filesystem::path& path);

/// Cloud tables are the same without the weight column.
void write_cloud_table(const std::filesystem::path& path, const ParticleCloud& cloud);
ParticleCloud read_cloud_table(const std::filesystem::path& path);

/// Parses numeric CSV rows; every row must have the same width.
std::vector<std::vector<double>> read_numeric_rows(const std::filesystem::path& path);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace pwifs
