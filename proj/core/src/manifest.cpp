// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwifs/manifest.hpp"

#include <algorithm>
#include <memory>

#include <openssl/evp.h>

#include "json.hpp"
#include "pwifs/error.hpp"
#include "pwifs/table_io.hpp"

namespace pwifs {

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1)
    throw IoError("sha256: digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text_file(path)); }

std::vector<ManifestEntry> hash_files(const std::filesystem::path& root,
                                      const std::vector<std::string>& relative_paths) {
  std::vector<ManifestEntry> out;
  for (const auto& rel : relative_paths) {
    const std::string bytes = read_text_file(root / rel);
    out.push_back({rel, bytes.size(), sha256_hex(bytes)});
  }
  std::sort(out.begin(), out.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
  return out;
}

namespace {

nlohmann::ordered_json section(const std::vector<ManifestEntry>& entries) {
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& e : entries)
    files.push_back({{"path", e.path}, {"bytes", e.bytes}, {"sha256", e.sha256}});
  return {{"files", files}};
}

std::vector<ManifestEntry> read_section(const nlohmann::json& j) {
  std::vector<ManifestEntry> out;
  for (const auto& f : j.at("files"))
    out.push_back({f.at("path").get<std::string>(), f.at("bytes").get<std::uintmax_t>(),
                   f.at("sha256").get<std::string>()});
  return out;
}

}  // namespace

std::string to_json(const Manifest& manifest) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["tool"] = manifest.tool;
  j["version"] = manifest.version;
  j["seed"] = manifest.seed;
  j["config_sha256"] = manifest.config_sha256;
  j["data"] = section(manifest.data);
  j["figures"] = section(manifest.figures);
  return j.dump(2) + "\n";
}

Manifest parse_manifest(std::string_view json_text) {
  try {
    const auto j = nlohmann::json::parse(json_text);
    Manifest m;
    m.tool = j.at("tool").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_sha256 = j.at("config_sha256").get<std::string>();
    m.data = read_section(j.at("data"));
    m.figures = read_section(j.at("figures"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("manifest: ") + e.what());
  }
}

}  // namespace pwifs
