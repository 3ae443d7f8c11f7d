// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "axtrack/within_clip.hpp"

#include <cmath>

#include <fmt/format.h>

#include "axtrack/error.hpp"
#include "axtrack/tensor_ops.hpp"

namespace axtrack {

void FeaturePyramid::validate() const {
  if (levels.size() != kPyramidLevels) {
    throw DimensionError(fmt::format("pyramid needs {} levels, got {}", kPyramidLevels, levels.size()));
  }
  for (std::size_t l = 0; l < kPyramidLevels; ++l) {
    const ClipFeatures& f = levels[l];
    if (f.data.rank() != 4 || f.frames() != frames() || f.channels() != channels()) {
      throw DimensionError(fmt::format("pyramid level {} has shape {}", l, shape_to_string(f.data.shape())));
    }
    if (l > 0 && (f.height() != 2 * levels[l - 1].height() || f.width() != 2 * levels[l - 1].width())) {
      throw DimensionError(fmt::format("pyramid level {} ({}x{}) is not twice level {} ({}x{})", l,
                                       f.height(), f.width(), l - 1, levels[l - 1].height(),
                                       levels[l - 1].width()));
    }
  }
}

namespace {

ClipFeatures avg_pool2(const ClipFeatures& f) {
  const std::size_t T = f.frames(), D = f.channels(), H = f.height() / 2, W = f.width() / 2;
  DenseArray out({T, D, H, W});
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t c = 0; c < D; ++c)
      for (std::size_t h = 0; h < H; ++h)
        for (std::size_t w = 0; w < W; ++w) {
          out(t, c, h, w) = 0.25 * (f.data(t, c, 2 * h, 2 * w) + f.data(t, c, 2 * h, 2 * w + 1) +
                                     f.data(t, c, 2 * h + 1, 2 * w) + f.data(t, c, 2 * h + 1, 2 * w + 1));
        }
  return ClipFeatures(std::move(out));
}

}  // namespace

FeaturePyramid build_pyramid(const ClipFeatures& finest) {
  if (finest.height() % 4 != 0 || finest.width() % 4 != 0) {
    throw DimensionError(fmt::format("pyramid base {}x{} must be divisible by 4", finest.height(),
                                     finest.width()));
  }
  const ClipFeatures mid = avg_pool2(finest);
  ClipFeatures coarse = avg_pool2(mid);
  return FeaturePyramid{{std::move(coarse), mid, finest}};
}

void DeformParams::validate(std::size_t d) const {
  const std::size_t k = points;
  if (k == 0) throw ConfigError("deformable attention needs at least one sampling point");
  for (std::size_t l = 0; l < kPyramidLevels; ++l) {
    if (value[l].weight.shape() != Shape{d, d} || value[l].bias.shape() != Shape{d} ||
        offset_weight[l].shape() != Shape{2 * k, d} || offset_bias[l].shape() != Shape{2 * k}) {
      throw DimensionError(fmt::format("deformable parameters of level {} do not match D={}, K={}", l, d, k));
    }
  }
  if (attn_weight.shape() != Shape{kPyramidLevels * k, d} || attn_bias.shape() != Shape{kPyramidLevels * k} ||
      output.weight.shape() != Shape{d, d} || output.bias.shape() != Shape{d}) {
    throw DimensionError(fmt::format("deformable weight/output parameters do not match D={}, K={}", d, k));
  }
}

DeformParams initial_deform_params(std::size_t d, std::size_t points, Rng& rng, double range) {
  if (range <= 0.0) range = 1.0 / std::sqrt(static_cast<double>(d));
  auto proj = [&] {
    Projection p = Projection::zero(d);
    for (double& v : p.weight.data()) v = rng.uniform(-range, range);
    return p;
  };
  DeformParams p;
  p.points = points;
  for (std::size_t l = 0; l < kPyramidLevels; ++l) {
    p.value[l] = proj();
    p.offset_weight[l] = DenseArray({2 * points, d});
    p.offset_bias[l] = DenseArray({2 * points});
  }
  p.attn_weight = DenseArray({kPyramidLevels * points, d});
  p.attn_bias = DenseArray({kPyramidLevels * points});
  p.output = proj();
  return p;
}

double map_reference(std::size_t index, std::size_t from, std::size_t to) {
  if (from <= 1) return 0.5 * static_cast<double>(to - 1);
  return static_cast<double>(index) * static_cast<double>(to - 1) / static_cast<double>(from - 1);
}

FeaturePyramid msdeform_simplified(const FeaturePyramid& pyr, const DeformParams& params,
                                   DeformWeights* weights) {
  pyr.validate();
  const std::size_t T = pyr.frames(), D = pyr.channels(), K = params.points;
  params.validate(D);
  const std::size_t samples = kPyramidLevels * K;

  // Value maps per level and frame: D x H x W, projected per pixel.
  std::array<std::vector<DenseArray>, kPyramidLevels> values;
  for (std::size_t l = 0; l < kPyramidLevels; ++l) {
    const ClipFeatures& f = pyr.levels[l];
    const std::size_t H = f.height(), W = f.width();
    for (std::size_t t = 0; t < T; ++t) {
      // Frame t as (H*W) x D rows.
      DenseArray rows({H * W, D});
      for (std::size_t c = 0; c < D; ++c)
        for (std::size_t p = 0; p < H * W; ++p) rows(p, c) = f.data[(t * D + c) * H * W + p];
      const DenseArray proj = linear(rows, params.value[l].weight, &params.value[l].bias);
      DenseArray map({D, H, W});
      for (std::size_t c = 0; c < D; ++c)
        for (std::size_t p = 0; p < H * W; ++p) map[c * H * W + p] = proj(p, c);
      values[l].push_back(std::move(map));
    }
  }

  FeaturePyramid out = pyr;
  std::vector<std::array<double, 2>> points(K);
  std::vector<double> logits(samples);
  DenseArray query({1, D});
  for (std::size_t ql = 0; ql < kPyramidLevels; ++ql) {
    const ClipFeatures& f = pyr.levels[ql];
    const std::size_t H = f.height(), W = f.width();
    if (weights != nullptr) (*weights)[ql] = DenseArray({T, H, W, samples});
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t i = 0; i < H; ++i) {
        for (std::size_t j = 0; j < W; ++j) {
          for (std::size_t c = 0; c < D; ++c) query[c] = f.data(t, c, i, j);
          const DenseArray attn = linear(query, params.attn_weight, &params.attn_bias);
          for (std::size_t s = 0; s < samples; ++s) logits[s] = attn[s];
          softmax_inplace(logits);
          if (weights != nullptr)
            for (std::size_t s = 0; s < samples; ++s) (*weights)[ql](t, i, j, s) = logits[s];

          std::vector<double> agg(D, 0.0);
          for (std::size_t l = 0; l < kPyramidLevels; ++l) {
            const ClipFeatures& target = pyr.levels[l];
            const double ry = map_reference(i, H, target.height());
            const double rx = map_reference(j, W, target.width());
            const DenseArray off = linear(query, params.offset_weight[l], &params.offset_bias[l]);
            for (std::size_t k = 0; k < K; ++k) points[k] = {ry + off[2 * k], rx + off[2 * k + 1]};
            const DenseArray sampled = bilinear_sample(values[l][t], points);
            for (std::size_t k = 0; k < K; ++k) {
              const double a = logits[l * K + k];
              for (std::size_t c = 0; c < D; ++c) agg[c] += a * sampled(k, c);
            }
          }
          for (std::size_t o = 0; o < D; ++o) {
            double acc = 0.0;
            for (std::size_t c = 0; c < D; ++c) acc += params.output.weight(o, c) * agg[c];
            out.levels[ql].data(t, o, i, j) += acc + params.output.bias[o];
          }
        }
      }
    }
  }
  for (const ClipFeatures& lvl : out.levels) require_finite(lvl.data, "msdeform_simplified output");
  return out;
}

FeaturePyramid within_clip_forward(const FeaturePyramid& pyr, const std::vector<WithinClipBlock>& blocks,
                                   FieldCapture* capture) {
  pyr.validate();
  FeaturePyramid cur = pyr;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    cur = msdeform_simplified(cur, blocks[b].deform);
    for (std::size_t l = 0; l < kPyramidLevels; ++l) {
      const bool record = capture != nullptr && capture->block == b && capture->level == l;
      const ClipFeatures mid =
          axial_trajectory_h(cur.levels[l], blocks[b].axial.height, record ? &capture->height : nullptr);
      cur.levels[l] =
          axial_trajectory_w(mid, blocks[b].axial.width, record ? &capture->width : nullptr);
      if (record) capture->filled = true;
    }
  }
  return cur;
}

}  // namespace axtrack
