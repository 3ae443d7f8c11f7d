// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0
//
// Trajectory visualisation: for a reference pixel, the height-pass and
// width-pass stage-1 weight rows are multiplied into one H x W map per
// target frame.

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "axtrack/clip_segmenter.hpp"
#include "axtrack/harness/synthetic.hpp"
#include "axtrack/trajectory_attention.hpp"

namespace axtrack {

struct HeatmapReference {
  std::size_t t = 0, h = 0, w = 0;
};

// map_t'[h'][w'] = A_h(t, h, w -> t', h') * A_w(t, h, w -> t', w'), heads
// averaged. IndexError when the reference is out of range.
std::vector<DenseArray> trajectory_heatmaps(const TrajectoryField& height, const TrajectoryField& width,
                                            const HeatmapReference& ref);

// Writes t%04d.pgm per target frame into out_dir (created if missing).
std::vector<std::filesystem::path> dump_attention_heatmaps(const TrajectoryField& height,
                                                           const TrajectoryField& width,
                                                           const HeatmapReference& ref,
                                                           const std::filesystem::path& out_dir);

// Row-major first maximum of an H x W map.
std::array<std::size_t, 2> argmax_pixel(const DenseArray& map);

struct TrackingStats {
  std::size_t pairs = 0;  // (reference, target frame) pairs
  std::size_t hits = 0;   // argmax inside the object's mask
  double rate() const { return pairs == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(pairs); }
};

// Every pixel of every moving object is a reference; for each target frame
// of its clip the heatmap argmax is tested against that object's GT mask.
// Fields are taken from `block` of the within-clip module at the finest
// level. Frames past the end of the video are skipped.
TrackingStats measure_tracking(const SyntheticVideo& video, const SyntheticVideoSpec& spec, std::size_t clip_len,
                               const SegmenterParams& params, std::size_t block = 0);

}  // namespace axtrack
