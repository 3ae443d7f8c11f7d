// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "axtrack/harness/heatmap.hpp"

#include <algorithm>
#include <system_error>

#include <fmt/format.h>

#include "axtrack/error.hpp"
#include "axtrack/harness/pgm.hpp"
#include "axtrack/within_clip.hpp"

namespace axtrack {

std::vector<DenseArray> trajectory_heatmaps(const TrajectoryField& height, const TrajectoryField& width,
                                            const HeatmapReference& ref) {
  const DenseArray& ah = height.stage1_weights;  // W x G x T x H x T x H
  const DenseArray& aw = width.stage1_weights;   // H x G x T x W x T x W
  if (ah.rank() != 6 || aw.rank() != 6) throw DimensionError("heatmaps need both stage-1 weight fields");
  const std::size_t W = ah.extent(0), G = ah.extent(1), T = ah.extent(2), H = ah.extent(3);
  if (aw.shape() != Shape{H, G, T, W, T, W}) {
    throw DimensionError(fmt::format("height field {} and width field {} disagree", shape_to_string(ah.shape()),
                                     shape_to_string(aw.shape())));
  }
  if (ref.t >= T || ref.h >= H || ref.w >= W) {
    throw IndexError(fmt::format("reference ({}, {}, {}) outside {}x{}x{}", ref.t, ref.h, ref.w, T, H, W));
  }
  std::vector<DenseArray> maps;
  for (std::size_t tp = 0; tp < T; ++tp) {
    std::vector<double> row_h(H, 0.0), row_w(W, 0.0);
    for (std::size_t g = 0; g < G; ++g) {
      for (std::size_t i = 0; i < H; ++i) row_h[i] += ah(ref.w, g, ref.t, ref.h, tp, i);
      for (std::size_t j = 0; j < W; ++j) row_w[j] += aw(ref.h, g, ref.t, ref.w, tp, j);
    }
    DenseArray map({H, W});
    const double norm = static_cast<double>(G) * static_cast<double>(G);
    for (std::size_t i = 0; i < H; ++i)
      for (std::size_t j = 0; j < W; ++j) map(i, j) = row_h[i] * row_w[j] / norm;
    maps.push_back(std::move(map));
  }
  return maps;
}

std::vector<std::filesystem::path> dump_attention_heatmaps(const TrajectoryField& height,
                                                           const TrajectoryField& width,
                                                           const HeatmapReference& ref,
                                                           const std::filesystem::path& out_dir) {
  const std::vector<DenseArray> maps = trajectory_heatmaps(height, width, ref);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", out_dir.string(), ec.message()));
  std::vector<std::filesystem::path> paths;
  for (std::size_t tp = 0; tp < maps.size(); ++tp) {
    paths.push_back(out_dir / fmt::format("t{:04}.pgm", tp));
    write_pgm(paths.back(), normalized_image(maps[tp]));
  }
  return paths;
}

std::array<std::size_t, 2> argmax_pixel(const DenseArray& map) {
  if (map.rank() != 2) throw DimensionError("argmax_pixel needs an H x W map");
  const auto it = std::max_element(map.data().begin(), map.data().end());
  const auto flat = static_cast<std::size_t>(it - map.data().begin());
  return {flat / map.extent(1), flat % map.extent(1)};
}

TrackingStats measure_tracking(const SyntheticVideo& video, const SyntheticVideoSpec& spec, std::size_t clip_len,
                               const SegmenterParams& params, std::size_t block) {
  if (spec.objects.size() != video.gt.tubes.size()) throw DimensionError("spec and ground truth disagree");
  const std::vector<ClipFeatures> clips = split_into_clips(video.video, clip_len);
  TrackingStats stats;
  for (std::size_t k = 0; k < clips.size(); ++k) {
    FieldCapture cap;
    cap.block = block;
    within_clip_forward(build_pyramid(clips[k]), params.within, &cap);
    if (!cap.filled) throw ConfigError(fmt::format("no within-clip block {} to capture", block));
    const std::size_t t0 = k * clip_len, frames = std::min(clip_len, spec.frames - t0);
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
      if (spec.objects[i].dy == 0 && spec.objects[i].dx == 0) continue;
      const DenseArray& m = video.gt.tubes[i].masks;
      for (std::size_t t = 0; t < frames; ++t)
        for (std::size_t h = 0; h < spec.height; ++h)
          for (std::size_t w = 0; w < spec.width; ++w) {
            if (m(t0 + t, h, w) <= 0.5) continue;
            const std::vector<DenseArray> maps = trajectory_heatmaps(cap.height, cap.width, {t, h, w});
            for (std::size_t tp = 0; tp < frames; ++tp) {
              const auto a = argmax_pixel(maps[tp]);
              ++stats.pairs;
              if (m(t0 + tp, a[0], a[1]) > 0.5) ++stats.hits;
            }
          }
    }
  }
  return stats;
}

}  // namespace axtrack
