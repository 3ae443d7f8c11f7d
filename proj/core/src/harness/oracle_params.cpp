// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "axtrack/harness/oracle_params.hpp"

#include <array>
#include <vector>

#include <fmt/format.h>

#include "axtrack/error.hpp"

namespace axtrack {
namespace {

Projection scaled_identity(std::size_t d, double gain) {
  Projection p = Projection::identity(d);
  for (double& v : p.weight.data()) v *= gain;
  return p;
}

AttentionParams tracking_attention(const ModelConfig& cfg) {
  const std::size_t d = cfg.channels;
  AttentionParams p;
  p.first = {scaled_identity(d, kOracleKeyGain), scaled_identity(d, kOracleKeyGain), Projection::identity(d)};
  p.second = {Projection::identity(d), Projection::identity(d), Projection::zero(d)};
  p.norm = NormParams::unit(d);
  p.scale = cfg.attention_scale();
  p.heads = cfg.heads;
  return p;
}

// Channels not used as object colours, one per object, or empty when D is
// too small.
std::vector<std::size_t> context_channels(const SyntheticVideoSpec& spec, std::size_t d) {
  std::vector<char> used(d, 0);
  for (const ObjectSpec& o : spec.objects) used[o.color] = 1;
  std::vector<std::size_t> free;
  for (std::size_t c = 0; c < d && free.size() < spec.objects.size(); ++c)
    if (!used[c]) free.push_back(c);
  if (free.size() < spec.objects.size()) free.clear();
  return free;
}

// The deformable step samples the 4-neighbourhood on the finest level and
// writes how much of each colour it saw into that colour's context channel.
// Colour channels are left untouched.
void add_neighbourhood_context(DeformParams& p, const SyntheticVideoSpec& spec,
                               const std::vector<std::size_t>& context) {
  constexpr std::size_t kFinest = kPyramidLevels - 1;
  constexpr double kFocus = 40.0;
  constexpr std::array<std::array<double, 2>, 4> kOffsets{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
  const std::size_t d = p.output.weight.extent(0), k = p.points;
  for (std::size_t l = 0; l < kPyramidLevels; ++l) p.value[l] = Projection::zero(d);
  p.output = Projection::zero(d);
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    for (std::size_t l = 0; l < kPyramidLevels; ++l) p.value[l].weight(context[i], spec.objects[i].color) = 1.0;
    p.output.weight(context[i], context[i]) = 1.0;
  }
  for (std::size_t j = 0; j < kOffsets.size(); ++j) {
    p.offset_bias[kFinest][2 * j] = kOffsets[j][0];
    p.offset_bias[kFinest][2 * j + 1] = kOffsets[j][1];
    p.attn_bias[kFinest * k + j] = kFocus;
  }
}

AsppParams silent_aspp(const ModelConfig& cfg, Rng& rng) {
  AsppParams p = random_aspp_params(cfg.channels, rng, cfg.atrous_rates);
  p.fusion = Projection::zero(cfg.channels);
  return p;
}

}  // namespace

ModelParams build_oracle_params(const SyntheticVideoSpec& spec, const ModelConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.channels;
  if (spec.channels != d) {
    throw ConfigError(fmt::format("video has {} channels but the model has D={}", spec.channels, d));
  }
  if (spec.objects.size() > cfg.queries) {
    throw ConfigError(fmt::format("{} objects need at least as many queries, have N={}", spec.objects.size(),
                                  cfg.queries));
  }
  for (const ObjectSpec& o : spec.objects) {
    if (o.color >= d) throw ConfigError(fmt::format("colour {} does not fit D={}", o.color, d));
    if (o.class_id < 0 || static_cast<std::size_t>(o.class_id) >= cfg.classes) {
      throw ConfigError(fmt::format("class {} does not fit C={}", o.class_id, cfg.classes));
    }
  }

  Rng rng(cfg.seed);
  ModelParams m;
  SegmenterParams& s = m.segmenter;
  const std::vector<std::size_t> context = context_channels(spec, d);
  for (std::size_t b = 0; b < cfg.n_within; ++b) {
    WithinClipBlock block{initial_deform_params(d, cfg.k_sample, rng), {tracking_attention(cfg), tracking_attention(cfg)}};
    block.deform.output = Projection::zero(d);
    if (b == 0 && !context.empty() && cfg.k_sample >= 4) add_neighbourhood_context(block.deform, spec, context);
    s.within.push_back(std::move(block));
  }
  for (std::size_t l = 0; l < cfg.decoder_layers; ++l) {
    DecoderLayerParams layer = random_decoder_layer(d, rng);
    layer.cross_out = Projection::zero(d);
    layer.self_out = Projection::zero(d);
    layer.ffn_w2 = DenseArray({d, 2 * d});
    layer.ffn_b2 = DenseArray({d});
    s.decoder.push_back(std::move(layer));
  }
  s.decoder_scale = cfg.attention_scale();
  s.init_queries = DenseArray({cfg.queries, d});
  s.class_head = DenseArray({d, cfg.classes});
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const ObjectSpec& o = spec.objects[i];
    s.init_queries(i, o.color) = kOracleQueryGain;
    s.class_head(o.color, static_cast<std::size_t>(o.class_id)) = 1.0;
  }
  for (std::size_t b = 0; b < cfg.n_cross; ++b) {
    m.cross.blocks.push_back({tracking_attention(cfg), silent_aspp(cfg, rng)});
  }
  return m;
}

ModelParams random_model_params(const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t d = cfg.channels;
  const double scale = cfg.attention_scale();
  ModelParams m;
  SegmenterParams& s = m.segmenter;
  for (std::size_t b = 0; b < cfg.n_within; ++b) {
    DeformParams deform = initial_deform_params(d, cfg.k_sample, rng);
    for (auto& w : deform.offset_weight)
      for (double& v : w.data()) v = rng.uniform(-0.5, 0.5);
    for (double& v : deform.attn_weight.data()) v = rng.uniform(-0.5, 0.5);
    s.within.push_back({std::move(deform),
                        {random_attention_params(d, rng, scale, cfg.heads), random_attention_params(d, rng, scale, cfg.heads)}});
  }
  for (std::size_t l = 0; l < cfg.decoder_layers; ++l) s.decoder.push_back(random_decoder_layer(d, rng));
  s.decoder_scale = scale;
  s.init_queries = DenseArray({cfg.queries, d});
  for (double& v : s.init_queries.data()) v = rng.gaussian(0.02);
  s.class_head = rng.array({d, cfg.classes});
  for (std::size_t b = 0; b < cfg.n_cross; ++b) {
    m.cross.blocks.push_back({random_attention_params(d, rng, scale, cfg.heads),
                              random_aspp_params(d, rng, cfg.atrous_rates)});
  }
  return m;
}

}  // namespace axtrack
