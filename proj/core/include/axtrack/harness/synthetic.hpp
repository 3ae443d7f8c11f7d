// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic videos of one-hot coloured rectangles moving at constant integer
// velocity, with exact ground-truth occupancy tubes.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "axtrack/dense_array.hpp"
#include "axtrack/evaluation.hpp"
#include "axtrack/harness/config.hpp"

namespace axtrack {

struct ObjectSpec {
  std::size_t height = 1, width = 1;  // rectangle size in pixels
  long dy = 0, dx = 0;                // pixels per frame
  std::size_t color = 0;              // channel set to 1 inside the rectangle
  int class_id = 0;
};

struct SyntheticVideoSpec {
  std::vector<ObjectSpec> objects;
  std::size_t frames = 8, height = 32, width = 32, channels = 8;
  std::uint64_t seed = 0;
  std::size_t max_retries = 100000;
};

struct SyntheticVideo {
  DenseArray video;  // L x D x H x W
  GroundTruthSet gt;
  std::vector<std::array<long, 2>> starts;  // top-left corner at frame 0
};

// Places the objects at random start positions that keep every rectangle in
// bounds for all frames and pairwise disjoint at every frame. Throws
// GenerationError when no placement is found within max_retries draws, or
// ConfigError for malformed specs.
SyntheticVideo generate_synthetic(const SyntheticVideoSpec& spec);

// cfg.objects objects with colours 0..objects-1, sizes between a quarter and
// three eighths of the frame and velocities in {-1, 0, 1} per axis, drawn from
// cfg.seed.
SyntheticVideoSpec default_synthetic_spec(const ModelConfig& cfg);

}  // namespace axtrack
