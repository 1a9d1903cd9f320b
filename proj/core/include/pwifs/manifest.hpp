// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pwifs {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

struct ManifestEntry {
  std::string path;  // relative to the output directory, '/' separated
  std::uintmax_t bytes = 0;
  std::string sha256;
};

struct Manifest {
  std::string tool = "pwifs";
  std::string version;
  std::uint64_t seed = 0;
  std::string config_sha256;
  std::vector<ManifestEntry> data;
  std::vector<ManifestEntry> figures;
};

/// Hashes each file under `root`. Entries come back sorted by path.
std::vector<ManifestEntry> hash_files(const std::filesystem::path& root,
                                      const std::vector<std::string>& relative_paths);

/// Deterministic JSON (sorted entries, no timestamps).
std::string to_json(const Manifest& manifest);
Manifest parse_manifest(std::string_view json_text);

}  // namespace pwifs
