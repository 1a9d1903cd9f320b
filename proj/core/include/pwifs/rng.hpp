// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pwifs {

/// Mixes a 64-bit value with the SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Derives a child seed from a master seed and an ordered key path, e.g.
/// derive_seed(seed, {epoch, block}). Distinct paths give unrelated seeds.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path) noexcept;

/// A reproducible random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. One quantum of the stream is one 64-bit engine output; a
/// uniform draw consumes exactly one quantum and keeps its top 53 bits, so
/// draws are bit-identical across platforms and standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1). Consumes one quantum.
  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). Consumes one quantum. Requires n > 0.
  std::uint64_t below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

  std::uint64_t next() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pwifs
