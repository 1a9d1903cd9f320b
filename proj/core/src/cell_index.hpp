// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0
//
// Open-addressing map from fixed-width integer keys (one int64 per
// coordinate) to dense ids in first-insertion order.

#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "pwifs/rng.hpp"

namespace pwifs::detail {

class CellIndex {
 public:
  CellIndex(std::size_t width, std::size_t expected) : width_(width) {
    std::size_t cap = 16;
    while (cap < expected * 2) cap <<= 1;
    slots_.assign(cap, kEmpty);
    keys_.reserve(expected * width_);
  }

  std::size_t size() const noexcept { return count_; }

  /// Returns the id for `key`, inserting it if new.
  std::uint32_t insert(std::span<const std::int64_t> key) {
    if ((count_ + 1) * 2 > slots_.size()) grow();
    std::size_t mask = slots_.size() - 1;
    std::size_t pos = hash(key) & mask;
    for (;;) {
      const std::uint32_t id = slots_[pos];
      if (id == kEmpty) {
        slots_[pos] = static_cast<std::uint32_t>(count_);
        keys_.insert(keys_.end(), key.begin(), key.end());
        return static_cast<std::uint32_t>(count_++);
      }
      if (std::memcmp(keys_.data() + id * width_, key.data(), width_ * sizeof(std::int64_t)) == 0)
        return id;
      pos = (pos + 1) & mask;
    }
  }

  std::span<const std::int64_t> key(std::size_t id) const noexcept {
    return {keys_.data() + id * width_, width_};
  }

 private:
  static constexpr std::uint32_t kEmpty = 0xffffffffu;

  std::size_t hash(std::span<const std::int64_t> key) const noexcept {
    std::uint64_t h = 0x8f1bbcdcbfa53e0bULL;
    for (std::int64_t k : key) h = splitmix64(h ^ static_cast<std::uint64_t>(k));
    return static_cast<std::size_t>(h);
  }

  void grow() {
    std::vector<std::uint32_t> old(slots_.size() * 2, kEmpty);
    old.swap(slots_);
    const std::size_t mask = slots_.size() - 1;
    for (std::size_t id = 0; id < count_; ++id) {
      std::size_t pos = hash(key(id)) & mask;
      while (slots_[pos] != kEmpty) pos = (pos + 1) & mask;
      slots_[pos] = static_cast<std::uint32_t>(id);
    }
  }

  std::size_t width_;
  std::size_t count_ = 0;
  std::vector<std::uint32_t> slots_;
  std::vector<std::int64_t> keys_;
};

}  // namespace pwifs::detail
