// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#include "pwifs/rng.hpp"

namespace pwifs {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t key : path) h = splitmix64(h ^ splitmix64(key + 0x632be59bd9b4e019ULL));
  return h;
}

}  // namespace pwifs
