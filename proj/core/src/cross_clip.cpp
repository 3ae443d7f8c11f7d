// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "axtrack/cross_clip.hpp"

#include <cmath>

#include <fmt/format.h>

#include "axtrack/error.hpp"
#include "axtrack/tensor_ops.hpp"

namespace axtrack {

void VideoQueryTensor::validate() const {
  if (data.rank() != 3) {
    throw DimensionError(fmt::format("video queries must be K x N x D, got {}", shape_to_string(data.shape())));
  }
  require_finite(data, "video queries");
}

VideoQueryTensor stack_queries(const std::vector<ClipQuerySet>& aligned) {
  if (aligned.empty()) throw DimensionError("no clip queries to stack");
  const Shape& s = aligned.front().queries.shape();
  DenseArray out({aligned.size(), s[0], s[1]});
  const std::size_t per_clip = s[0] * s[1];
  for (std::size_t k = 0; k < aligned.size(); ++k) {
    if (aligned[k].queries.shape() != s) {
      throw DimensionError(fmt::format("clip {} queries {} differ from {}", k,
                                       shape_to_string(aligned[k].queries.shape()), shape_to_string(s)));
    }
    std::copy_n(aligned[k].queries.data().begin(), per_clip,
                out.data().begin() + static_cast<std::ptrdiff_t>(k * per_clip));
  }
  return VideoQueryTensor{std::move(out)};
}

ClipQuerySet clip_queries(const VideoQueryTensor& z, std::size_t k) {
  if (k >= z.clips()) throw IndexError(fmt::format("clip {} out of range [0, {})", k, z.clips()));
  const std::size_t n = z.tracks(), d = z.dim();
  DenseArray q({n, d});
  std::copy_n(z.data.data().begin() + static_cast<std::ptrdiff_t>(k * n * d), n * d, q.data().begin());
  return ClipQuerySet{std::move(q), k};
}

void AsppParams::validate(std::size_t d) const {
  for (std::size_t b = 0; b < 3; ++b) {
    if (rates[b] < 1 || (b > 0 && rates[b] <= rates[b - 1])) {
      throw ConfigError(fmt::format("atrous rates must be increasing positive integers, got ({}, {}, {})",
                                    rates[0], rates[1], rates[2]));
    }
    if (kernels[b].shape() != Shape{3, d, d}) {
      throw DimensionError(fmt::format("atrous kernel {} has shape {}, expected [3x{}x{}]", b,
                                       shape_to_string(kernels[b].shape()), d, d));
    }
  }
  if (fusion.weight.shape() != Shape{d, d} || fusion.bias.shape() != Shape{d} || norm.gamma.shape() != Shape{d} ||
      norm.beta.shape() != Shape{d}) {
    throw DimensionError(fmt::format("aspp fusion/norm parameters do not match D={}", d));
  }
}

AsppParams random_aspp_params(std::size_t d, Rng& rng, std::array<int, 3> rates, double range) {
  if (range <= 0.0) range = 1.0 / std::sqrt(static_cast<double>(3 * d));
  AsppParams p;
  p.rates = rates;
  for (auto& k : p.kernels) {
    k = DenseArray({3, d, d});
    for (double& v : k.data()) v = rng.uniform(-range, range);
  }
  p.fusion = Projection::zero(d);
  for (double& v : p.fusion.weight.data()) v = rng.uniform(-range, range);
  p.norm = NormParams::unit(d);
  return p;
}

VideoQueryTensor query_trajectory_attention(const VideoQueryTensor& z, const AttentionParams& params,
                                            TrajectoryField* field) {
  z.validate();
  params.validate(z.dim());
  const DenseArray normed = layer_norm(z.data, params.norm.gamma, params.norm.beta, params.norm.eps);
  TrajectoryPassResult r = trajectory_pass_1d(normed.reshaped({1, z.clips(), z.tracks(), z.dim()}), params);
  if (field != nullptr) *field = std::move(r.field);
  return VideoQueryTensor{add(z.data, r.out.reshaped(z.data.shape()))};
}

VideoQueryTensor temporal_aspp(const VideoQueryTensor& z, const AsppParams& params) {
  z.validate();
  const std::size_t K = z.clips(), N = z.tracks(), D = z.dim();
  params.validate(D);
  VideoQueryTensor out = z;
  for (std::size_t n = 0; n < N; ++n) {
    DenseArray track({K, D});
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t c = 0; c < D; ++c) track(k, c) = z.data(k, n, c);
    DenseArray sum({K, D});
    for (std::size_t b = 0; b < 3; ++b) sum = add(sum, atrous_conv1d(track, params.kernels[b], params.rates[b]));
    const DenseArray fused = linear(sum, params.fusion.weight, &params.fusion.bias);
    const DenseArray normed = layer_norm(fused, params.norm.gamma, params.norm.beta, params.norm.eps);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t c = 0; c < D; ++c) out.data(k, n, c) += normed(k, c);
  }
  require_finite(out.data, "temporal_aspp output");
  return out;
}

VideoQueryTensor cross_clip_forward(const VideoQueryTensor& z, const std::vector<CrossClipBlock>& blocks) {
  z.validate();
  VideoQueryTensor cur = z;
  for (const CrossClipBlock& b : blocks) {
    cur = query_trajectory_attention(cur, b.attention);
    cur = temporal_aspp(cur, b.aspp);
  }
  return cur;
}

DenseArray temporal_class_head(const VideoQueryTensor& z, const DenseArray& class_head, const ClassKernel& kernel) {
  z.validate();
  const std::size_t K = z.clips(), N = z.tracks(), D = z.dim();
  if (class_head.rank() != 2 || class_head.extent(0) != D) {
    throw DimensionError(fmt::format("class head {} does not match D={}", shape_to_string(class_head.shape()), D));
  }
  const std::size_t C = class_head.extent(1);
  DenseArray logits({K, N, C});
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t c = 0; c < C; ++c) {
        double acc = 0.0;
        for (std::size_t d = 0; d < D; ++d) acc += class_head(d, c) * z.data(k, n, d);
        logits(k, n, c) = acc;
      }
  DenseArray out({N, C});
  for (std::size_t n = 0; n < N; ++n) {
    std::vector<double> row(C, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t c = 0; c < C; ++c) {
        double acc = 0.0, weight = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
          const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(k + j) - 1;
          if (src < 0 || src >= static_cast<std::ptrdiff_t>(K)) continue;
          acc += kernel[j] * logits(static_cast<std::size_t>(src), n, c);
          weight += kernel[j];
        }
        if (weight == 0.0) throw ConfigError("class-head kernel has no weight inside the video");
        row[c] += acc / weight;
      }
    }
    for (double& v : row) v /= static_cast<double>(K);
    softmax_inplace(row);
    for (std::size_t c = 0; c < C; ++c) out(n, c) = row[c];
  }
  return out;
}

OfflineResult run_offline(const DenseArray& video, std::size_t clip_len, const ModelParams& params,
                          const NearOnlineOptions& opts) {
  OfflineResult res;
  res.near_online = run_near_online(video, clip_len, params.segmenter, opts);
  const NearOnlineResult& no = res.near_online;
  res.refined = cross_clip_forward(stack_queries(no.aligned), params.cross.blocks);
  const DenseArray probs = temporal_class_head(res.refined, params.segmenter.class_head, params.cross.class_kernel);

  const std::size_t K = no.features.size(), N = res.refined.tracks();
  std::vector<std::vector<DenseArray>> masks(N);
  for (std::size_t k = 0; k < K; ++k) {
    // Masks of clip k come from that clip's refined queries and features.
    const auto tubes = predict_clip_tubes(clip_queries(res.refined, k), no.features[k], params.segmenter.class_head);
    for (std::size_t n = 0; n < N; ++n) masks[n].push_back(tubes[n].masks);
  }
  for (std::size_t n = 0; n < N; ++n) {
    Tube t;
    t.masks = concat_masks(masks[n], no.frames);
    t.class_probs.assign(probs.data().begin() + static_cast<std::ptrdiff_t>(n * probs.extent(1)),
                         probs.data().begin() + static_cast<std::ptrdiff_t>((n + 1) * probs.extent(1)));
    t.track_id = n;
    res.tubes.push_back(std::move(t));
  }
  return res;
}

std::vector<Tube> offline_inference(const DenseArray& video, std::size_t clip_len, const ModelParams& params,
                                    const NearOnlineOptions& opts) {
  return run_offline(video, clip_len, params, opts).tubes;
}

}  // namespace axtrack
