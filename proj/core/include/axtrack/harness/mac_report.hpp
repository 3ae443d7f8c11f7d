// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

#include "axtrack/harness/config.hpp"
#include "axtrack/mac_counter.hpp"

namespace axtrack {

// Closed forms for one trajectory pass over B x T x S x D (heads do not change
// the count: each head reduces over D / heads channels).
MacCounter analytic_pass_macs(std::uint64_t B, std::uint64_t T, std::uint64_t S, std::uint64_t D);
// Joint H*W axis, B = 1.
MacCounter analytic_full_macs(std::uint64_t T, std::uint64_t H, std::uint64_t W, std::uint64_t D);
// Height pass (B = W, S = H) plus width pass (B = H, S = W).
MacCounter analytic_axial_macs(std::uint64_t T, std::uint64_t H, std::uint64_t W, std::uint64_t D);

struct MacScheme {
  MacCounter counted;
  MacCounter analytic;

  // Stage-1 scores + values.
  std::uint64_t counted_dominant() const { return counted.stage1_scores + counted.stage1_values; }
  std::uint64_t analytic_dominant() const { return analytic.stage1_scores + analytic.stage1_values; }
  bool exact() const;
};

struct MacReport {
  std::size_t frames = 0, height = 0, width = 0, channels = 0;
  MacScheme full, axial;

  double ratio() const;           // counted full / axial dominant terms
  double analytic_ratio() const;  // H W / (H + W)
  // full * (H + W) == axial * H * W, in integers.
  bool ratio_exact() const;
};

// Runs the full reference and the axial passes on seeded random input with
// an instrumented counter. ResourceError when T*H*W exceeds the full cap.
MacReport count_macs(const ModelConfig& cfg);

}  // namespace axtrack
