// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace axtrack {

// Multiply-accumulate tallies, split by attention stage. Kernels that accept
// a MacCounter* increment it by the length of every dot product they execute.
struct MacCounter {
  std::uint64_t stage1_scores = 0;
  std::uint64_t stage1_values = 0;
  std::uint64_t stage2_scores = 0;
  std::uint64_t stage2_values = 0;
  std::uint64_t projections = 0;

  std::uint64_t total() const {
    return stage1_scores + stage1_values + stage2_scores + stage2_values + projections;
  }
};

}  // namespace axtrack
