// Copyright 2026 The pwifs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "pwifs/discrete_measure.hpp"

namespace pwifs::detail {

/// Merges raw atoms (weights need not be normalised) on the grid of the
/// given resolution, prunes to the cap and renormalises.
Compressed compress_raw(std::size_t dimension, std::vector<double> coords,
                        std::vector<double> weights, const CompressOptions& options);

}  // namespace pwifs::detail
