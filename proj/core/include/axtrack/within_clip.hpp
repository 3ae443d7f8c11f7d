// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0
//
// Within-clip tracking: stacked blocks of simplified multi-scale deformable
// attention (spatial, frame by frame) followed by height- and width-axis
// trajectory attention (temporal) on every pyramid level.

#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "axtrack/trajectory_attention.hpp"

namespace axtrack {

inline constexpr std::size_t kPyramidLevels = 3;

// Levels ordered coarse to fine (strides 32, 16, 8). All share T and D and
// spatial extents double from one level to the next.
struct FeaturePyramid {
  std::vector<ClipFeatures> levels;

  std::size_t frames() const { return levels.front().frames(); }
  std::size_t channels() const { return levels.front().channels(); }
  const ClipFeatures& finest() const { return levels.back(); }

  // Throws DimensionError unless the level invariants hold.
  void validate() const;
};

// Builds the coarser levels by 2x2 average pooling of `finest`.
FeaturePyramid build_pyramid(const ClipFeatures& finest);

struct DeformParams {
  std::size_t points = 4;  // sampling points per level
  std::array<Projection, kPyramidLevels> value;          // D x D per level
  std::array<DenseArray, kPyramidLevels> offset_weight;  // 2K x D per level, rows (dy, dx) per point
  std::array<DenseArray, kPyramidLevels> offset_bias;    // 2K
  DenseArray attn_weight;  // 3K x D, ordered level-major
  DenseArray attn_bias;    // 3K
  Projection output;

  void validate(std::size_t d) const;
};

// Zero offset and weight predictors (uniform weights at the reference
// points); value and output projections uniform in (-range, range).
DeformParams initial_deform_params(std::size_t d, std::size_t points, Rng& rng, double range = -1.0);

// Reference position of pixel `index` of an extent-`from` axis expressed in
// pixel units of an extent-`to` axis. Corners map to corners.
double map_reference(std::size_t index, std::size_t from, std::size_t to);

// Per frame and per query pixel of every level: sample each level at the
// mapped reference plus K predicted offsets, combine the 3K samples with
// softmax weights, project and add to the input. `weights`, when given,
// receives per query level the T x H x W x 3K sampling weights.
using DeformWeights = std::array<DenseArray, kPyramidLevels>;
FeaturePyramid msdeform_simplified(const FeaturePyramid& pyr, const DeformParams& params,
                                   DeformWeights* weights = nullptr);

struct WithinClipBlock {
  DeformParams deform;
  AxialParams axial;
};

// Records both stage-1 fields of one (block, level) for heatmap dumps.
struct FieldCapture {
  std::size_t block = 0;
  std::size_t level = kPyramidLevels - 1;
  TrajectoryField height;
  TrajectoryField width;
  bool filled = false;
};

FeaturePyramid within_clip_forward(const FeaturePyramid& pyr,
                                   const std::vector<WithinClipBlock>& blocks,
                                   FieldCapture* capture = nullptr);

}  // namespace axtrack
