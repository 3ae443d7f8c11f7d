// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0
//
// Cross-clip tracking over aligned clip queries: trajectory attention with
// (time, space) = (clip, query), temporal atrous pyramid pooling, a smoothed
// class head, and offline whole-video mask prediction.

#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "axtrack/clip_segmenter.hpp"
#include "axtrack/trajectory_attention.hpp"

namespace axtrack {

// K x N x D; row n of every clip belongs to track n.
struct VideoQueryTensor {
  DenseArray data;

  std::size_t clips() const { return data.extent(0); }
  std::size_t tracks() const { return data.extent(1); }
  std::size_t dim() const { return data.extent(2); }
  void validate() const;
};

VideoQueryTensor stack_queries(const std::vector<ClipQuerySet>& aligned);
ClipQuerySet clip_queries(const VideoQueryTensor& z, std::size_t k);

struct AsppParams {
  std::array<int, 3> rates{1, 2, 3};
  std::array<DenseArray, 3> kernels;  // 3 x D x D taps per branch
  Projection fusion;
  NormParams norm;

  void validate(std::size_t d) const;
};

AsppParams random_aspp_params(std::size_t d, Rng& rng, std::array<int, 3> rates = {1, 2, 3},
                              double range = -1.0);

// out = z + pass(LN(z)) with the pass run over a 1 x K x N x D sequence.
VideoQueryTensor query_trajectory_attention(const VideoQueryTensor& z, const AttentionParams& params,
                                            TrajectoryField* field = nullptr);

// Per track: sum of three atrous convolutions over K, 1x1 fusion, layer
// norm, residual.
VideoQueryTensor temporal_aspp(const VideoQueryTensor& z, const AsppParams& params);

struct CrossClipBlock {
  AttentionParams attention;
  AsppParams aspp;
};

VideoQueryTensor cross_clip_forward(const VideoQueryTensor& z, const std::vector<CrossClipBlock>& blocks);

using ClassKernel = std::array<double, 3>;
inline constexpr ClassKernel kDefaultClassKernel{0.25, 0.5, 0.25};

// Per-clip logits class_head^T z[k][n], smoothed over K by `kernel` (taps
// that fall outside the video are dropped and the rest renormalized),
// averaged over clips and softmaxed. Returns N x C.
DenseArray temporal_class_head(const VideoQueryTensor& z, const DenseArray& class_head,
                               const ClassKernel& kernel = kDefaultClassKernel);

struct CrossClipParams {
  std::vector<CrossClipBlock> blocks;
  ClassKernel class_kernel = kDefaultClassKernel;
};

struct ModelParams {
  SegmenterParams segmenter;
  CrossClipParams cross;
};

struct OfflineResult {
  std::vector<Tube> tubes;
  VideoQueryTensor refined;
  NearOnlineResult near_online;
};

OfflineResult run_offline(const DenseArray& video, std::size_t clip_len, const ModelParams& params,
                          const NearOnlineOptions& opts = {});

std::vector<Tube> offline_inference(const DenseArray& video, std::size_t clip_len, const ModelParams& params,
                                    const NearOnlineOptions& opts = {});

}  // namespace axtrack
