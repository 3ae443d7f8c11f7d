// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "axtrack/harness/mac_report.hpp"

#include "axtrack/rng.hpp"
#include "axtrack/trajectory_attention.hpp"

namespace axtrack {
namespace {

bool same(const MacCounter& a, const MacCounter& b) {
  return a.stage1_scores == b.stage1_scores && a.stage1_values == b.stage1_values &&
         a.stage2_scores == b.stage2_scores && a.stage2_values == b.stage2_values && a.projections == b.projections;
}

MacCounter plus(MacCounter a, const MacCounter& b) {
  a.stage1_scores += b.stage1_scores;
  a.stage1_values += b.stage1_values;
  a.stage2_scores += b.stage2_scores;
  a.stage2_values += b.stage2_values;
  a.projections += b.projections;
  return a;
}

}  // namespace

MacCounter analytic_pass_macs(std::uint64_t B, std::uint64_t T, std::uint64_t S, std::uint64_t D) {
  MacCounter m;
  m.stage1_scores = B * T * S * T * S * D;
  m.stage1_values = B * T * S * T * S * D;
  m.stage2_scores = B * T * S * T * D;
  m.stage2_values = B * T * S * T * D;
  // q, k, v on B*T*S rows; stage-2 q on the diagonal, k and v on all B*T*T*S points.
  m.projections = (3 * B * T * S + B * T * S + 2 * B * T * T * S) * D * D;
  return m;
}

MacCounter analytic_full_macs(std::uint64_t T, std::uint64_t H, std::uint64_t W, std::uint64_t D) {
  return analytic_pass_macs(1, T, H * W, D);
}

MacCounter analytic_axial_macs(std::uint64_t T, std::uint64_t H, std::uint64_t W, std::uint64_t D) {
  return plus(analytic_pass_macs(W, T, H, D), analytic_pass_macs(H, T, W, D));
}

bool MacScheme::exact() const { return same(counted, analytic); }

double MacReport::ratio() const {
  return static_cast<double>(full.counted_dominant()) / static_cast<double>(axial.counted_dominant());
}

double MacReport::analytic_ratio() const {
  return static_cast<double>(height * width) / static_cast<double>(height + width);
}

bool MacReport::ratio_exact() const {
  return full.counted_dominant() * (height + width) == axial.counted_dominant() * height * width;
}

MacReport count_macs(const ModelConfig& cfg) {
  cfg.validate();
  MacReport r;
  r.frames = cfg.clip_len;
  r.height = cfg.height;
  r.width = cfg.width;
  r.channels = cfg.channels;
  Rng rng(cfg.seed);
  const double scale = cfg.attention_scale();
  const ClipFeatures f(rng.array({cfg.clip_len, cfg.channels, cfg.height, cfg.width}));
  const AttentionParams full_params = random_attention_params(cfg.channels, rng, scale, cfg.heads);
  const AxialParams axial_params{random_attention_params(cfg.channels, rng, scale, cfg.heads),
                                 random_attention_params(cfg.channels, rng, scale, cfg.heads)};
  full_trajectory_reference(f, full_params, kDefaultFullTrajectoryCap, &r.full.counted);
  axial_trajectory(f, axial_params, &r.axial.counted);
  r.full.analytic = analytic_full_macs(cfg.clip_len, cfg.height, cfg.width, cfg.channels);
  r.axial.analytic = analytic_axial_macs(cfg.clip_len, cfg.height, cfg.width, cfg.channels);
  return r;
}

}  // namespace axtrack
