// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <numeric>

#include "axtrack/cross_clip.hpp"
#include "axtrack/error.hpp"
#include "axtrack/tensor_ops.hpp"
#include "oracles.hpp"

namespace axtrack {
namespace {

VideoQueryTensor random_z(std::size_t k, std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  return VideoQueryTensor{rng.array({k, n, d})};
}

AsppParams center_only_aspp(std::size_t d) {
  AsppParams p;
  for (auto& k : p.kernels) {
    k = DenseArray({3, d, d});
    for (std::size_t c = 0; c < d; ++c) k(1, c, c) = 1.0;
  }
  p.fusion = Projection::identity(d);
  p.norm = NormParams::unit(d);
  return p;
}

std::vector<CrossClipBlock> random_blocks(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CrossClipBlock> blocks;
  for (std::size_t i = 0; i < n; ++i)
    blocks.push_back({random_attention_params(d, rng, 1.0 / std::sqrt(static_cast<double>(d))),
                      random_aspp_params(d, rng)});
  return blocks;
}

// z with track n moved to position perm[n].
DenseArray permute_tracks(const DenseArray& z, const std::vector<std::size_t>& perm) {
  DenseArray out(z.shape());
  for (std::size_t k = 0; k < z.extent(0); ++k)
    for (std::size_t n = 0; n < z.extent(1); ++n)
      for (std::size_t c = 0; c < z.extent(2); ++c) out(k, perm[n], c) = z(k, n, c);
  return out;
}

TEST(QueryTrajectoryTest, MatchesNaiveOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const VideoQueryTensor z = random_z(3, 4, 8, seed + 50);
    const AttentionParams p = random_attention_params(8, rng, 0.35, seed % 2 == 0 ? 1 : 2);
    EXPECT_LT(max_abs_diff(query_trajectory_attention(z, p).data, oracle::query_trajectory(z.data, p)), 1e-10);
  }
}

TEST(QueryTrajectoryTest, SingleClipPoolingIsIdentity) {
  Rng rng(1);
  const VideoQueryTensor z = random_z(1, 4, 4, 2);
  const AttentionParams p = random_attention_params(4, rng, 0.5);
  TrajectoryField field;
  query_trajectory_attention(z, p, &field);
  for (double w : field.stage2_weights.data()) EXPECT_EQ(w, 1.0);
}

TEST(QueryTrajectoryTest, ZeroKeysAreUniformOverQueries) {
  Rng rng(3);
  const VideoQueryTensor z = random_z(2, 5, 4, 4);
  AttentionParams p = random_attention_params(4, rng, 0.5);
  p.first.key = Projection::zero(4);
  TrajectoryField field;
  query_trajectory_attention(z, p, &field);
  for (double w : field.stage1_weights.data()) EXPECT_NEAR(w, 0.2, 1e-15);
}

TEST(QueryTrajectoryTest, SoftmaxSlicesSumToOne) {
  Rng rng(5);
  const VideoQueryTensor z = random_z(3, 4, 4, 6);
  TrajectoryField field;
  query_trajectory_attention(z, random_attention_params(4, rng, 1.0), &field);
  const auto check = [](const DenseArray& w, std::size_t len) {
    for (std::size_t i = 0; i < w.size(); i += len) {
      double s = 0.0;
      for (std::size_t j = 0; j < len; ++j) s += w[i + j];
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  };
  check(field.stage1_weights, 4);
  check(field.stage2_weights, 3);
}

TEST(TemporalAsppTest, CenterTapsGiveNormOfThreeZ) {
  const VideoQueryTensor z = random_z(4, 3, 5, 7);
  const VideoQueryTensor out = temporal_aspp(z, center_only_aspp(5));
  const NormParams unit = NormParams::unit(5);
  const DenseArray expect = add(layer_norm(scale(z.data, 3.0), unit.gamma, unit.beta, unit.eps), z.data);
  EXPECT_LT(max_abs_diff(out.data, expect), 1e-12);
}

TEST(TemporalAsppTest, SingleClipReadsOnlyCenterTaps) {
  Rng rng(8);
  const VideoQueryTensor z = random_z(1, 3, 4, 9);
  AsppParams p = random_aspp_params(4, rng);
  const VideoQueryTensor base = temporal_aspp(z, p);
  for (auto& k : p.kernels)
    for (std::size_t o = 0; o < 4; ++o)
      for (std::size_t i = 0; i < 4; ++i) k(0, o, i) = k(2, o, i) = 100.0;
  EXPECT_EQ(temporal_aspp(z, p).data, base.data);
}

TEST(TemporalAsppTest, TracksAreIndependent) {
  Rng rng(10);
  const VideoQueryTensor z = random_z(5, 4, 4, 11);
  const AsppParams p = random_aspp_params(4, rng);
  const VideoQueryTensor base = temporal_aspp(z, p);
  VideoQueryTensor moved = z;
  for (std::size_t k = 0; k < 5; ++k) moved.data(k, 2, 1) += 3.0;
  const VideoQueryTensor out = temporal_aspp(moved, p);
  for (std::size_t k = 0; k < 5; ++k)
    for (std::size_t n = 0; n < 4; ++n)
      for (std::size_t c = 0; c < 4; ++c)
        if (n != 2) EXPECT_EQ(out.data(k, n, c), base.data(k, n, c));
}

TEST(TemporalAsppTest, MatchesNaiveOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 20);
    const VideoQueryTensor z = random_z(6, 3, 4, seed + 30);
    const AsppParams p = random_aspp_params(4, rng);
    EXPECT_LT(max_abs_diff(temporal_aspp(z, p).data, oracle::aspp(z.data, p)), 1e-10);
  }
}

TEST(TemporalAsppTest, RejectsBadRates) {
  Rng rng(12);
  const VideoQueryTensor z = random_z(2, 2, 4, 13);
  EXPECT_THROW(temporal_aspp(z, random_aspp_params(4, rng, {1, 1, 2})), ConfigError);
  EXPECT_THROW(temporal_aspp(z, random_aspp_params(4, rng, {0, 1, 2})), ConfigError);
  EXPECT_THROW(temporal_aspp(z, random_aspp_params(3, rng)), DimensionError);
}

TEST(CrossClipTest, ZeroBlocksIsIdentity) {
  const VideoQueryTensor z = random_z(3, 4, 4, 14);
  EXPECT_EQ(cross_clip_forward(z, {}).data, z.data);
}

TEST(CrossClipTest, FourBlocksPreserveShapeDeterministically) {
  const VideoQueryTensor z = random_z(3, 5, 8, 15);
  const VideoQueryTensor a = cross_clip_forward(z, random_blocks(4, 8, 16));
  const VideoQueryTensor b = cross_clip_forward(z, random_blocks(4, 8, 16));
  EXPECT_EQ(a.data.shape(), z.data.shape());
  EXPECT_EQ(a.data, b.data);
  EXPECT_TRUE(all_finite(a.data));
}

TEST(CrossClipTest, TrackPermutationEquivariance) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const VideoQueryTensor z = random_z(3, 5, 4, seed + 40);
    std::vector<std::size_t> perm(5);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = 5; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    const auto blocks = random_blocks(2, 4, seed + 60);
    const DenseArray base = cross_clip_forward(z, blocks).data;
    const DenseArray moved = cross_clip_forward(VideoQueryTensor{permute_tracks(z.data, perm)}, blocks).data;
    EXPECT_EQ(moved, permute_tracks(base, perm));
    const DenseArray head = rng.array({4, 3});
    const DenseArray h_base = temporal_class_head(VideoQueryTensor{base}, head);
    const DenseArray h_moved = temporal_class_head(VideoQueryTensor{moved}, head);
    for (std::size_t n = 0; n < 5; ++n)
      for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(h_moved(perm[n], c), h_base(n, c));
  }
}

TEST(ClassHeadTest, ConstantQueriesMatchSingleClip) {
  Rng rng(17);
  const DenseArray q = rng.array({3, 4});
  const DenseArray head = rng.array({4, 5});
  DenseArray z({4, 3, 4});
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t i = 0; i < q.size(); ++i) z[k * q.size() + i] = q[i];
  const DenseArray smoothed = temporal_class_head(VideoQueryTensor{z}, head);
  const auto tubes = predict_clip_tubes(ClipQuerySet{q, 0}, ClipFeatures(DenseArray({1, 4, 1, 1})), head);
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t c = 0; c < 5; ++c) EXPECT_NEAR(smoothed(n, c), tubes[n].class_probs[c], 1e-12);
}

TEST(ClassHeadTest, SingleClipIsPlainClassification) {
  Rng rng(18);
  const DenseArray q = rng.array({2, 4});
  const DenseArray head = rng.array({4, 3});
  const DenseArray out = temporal_class_head(VideoQueryTensor{q.reshaped({1, 2, 4})}, head, {0.0, 1.0, 0.0});
  const auto tubes = predict_clip_tubes(ClipQuerySet{q, 0}, ClipFeatures(DenseArray({1, 4, 1, 1})), head);
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(out(n, c), tubes[n].class_probs[c]);
}

TEST(ClassHeadTest, RowsSumToOne) {
  Rng rng(19);
  const DenseArray out = temporal_class_head(random_z(5, 4, 3, 20), rng.array({3, 6}));
  for (std::size_t n = 0; n < 4; ++n) {
    double s = 0.0;
    for (std::size_t c = 0; c < 6; ++c) s += out(n, c);
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

ModelParams random_model(std::size_t d, std::size_t n, std::size_t classes, std::size_t n_cross, std::uint64_t seed) {
  Rng rng(seed);
  ModelParams m;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  m.segmenter.within.push_back(
      {initial_deform_params(d, 2, rng), {random_attention_params(d, rng, scale), random_attention_params(d, rng, scale)}});
  m.segmenter.decoder.push_back(random_decoder_layer(d, rng));
  m.segmenter.decoder_scale = scale;
  m.segmenter.init_queries = rng.array({n, d});
  m.segmenter.class_head = rng.array({d, classes});
  m.cross.blocks = random_blocks(n_cross, d, seed + 1);
  return m;
}

TEST(OfflineTest, NoCrossBlocksReproducesNearOnlineMasks) {
  Rng rng(21);
  const DenseArray video = rng.array({5, 4, 4, 4});
  const ModelParams m = random_model(4, 3, 2, 0, 22);
  const auto near = near_online_inference(video, 2, m.segmenter);
  const auto off = offline_inference(video, 2, m);
  ASSERT_EQ(near.size(), off.size());
  for (std::size_t i = 0; i < near.size(); ++i) {
    EXPECT_EQ(off[i].masks, near[i].masks);
    EXPECT_EQ(off[i].track_id, near[i].track_id);
  }
}

TEST(OfflineTest, SingleClipWithFourBlocksSpansVideo) {
  Rng rng(23);
  const DenseArray video = rng.array({2, 4, 4, 4});
  const auto tubes = offline_inference(video, 2, random_model(4, 3, 2, 4, 24));
  ASSERT_EQ(tubes.size(), 3u);
  for (const Tube& t : tubes) {
    EXPECT_EQ(t.masks.shape(), (Shape{2, 4, 4}));
    double s = 0.0;
    for (double p : t.class_probs) s += p;
    EXPECT_NEAR(s, 1.0, 1e-9);
    for (double v : t.masks.data()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(OfflineTest, DoesNotMutateUpstreamState) {
  Rng rng(25);
  const DenseArray video = rng.array({4, 4, 4, 4});
  const ModelParams m = random_model(4, 3, 2, 2, 26);
  const OfflineResult r = run_offline(video, 2, m);
  const NearOnlineResult fresh = run_near_online(video, 2, m.segmenter);
  for (std::size_t k = 0; k < fresh.aligned.size(); ++k) {
    EXPECT_EQ(r.near_online.aligned[k].queries, fresh.aligned[k].queries);
    EXPECT_EQ(r.near_online.features[k].data, fresh.features[k].data);
  }
}

}  // namespace
}  // namespace axtrack
