// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "axtrack/error.hpp"
#include "axtrack/tensor_ops.hpp"
#include "axtrack/within_clip.hpp"
#include "oracles.hpp"

namespace axtrack {
namespace {

FeaturePyramid random_pyramid(std::size_t t, std::size_t d, std::size_t h32, std::size_t w32,
                              std::uint64_t seed) {
  Rng rng(seed);
  FeaturePyramid p;
  for (std::size_t l = 0; l < kPyramidLevels; ++l) {
    p.levels.emplace_back(rng.array({t, d, h32 << l, w32 << l}));
  }
  return p;
}

DeformParams random_deform(std::size_t d, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  DeformParams p = initial_deform_params(d, k, rng);
  for (std::size_t l = 0; l < kPyramidLevels; ++l) {
    for (double& v : p.offset_weight[l].data()) v = rng.uniform(-1.5, 1.5);
    for (double& v : p.offset_bias[l].data()) v = rng.uniform(-1.0, 1.0);
    rng.fill(p.value[l].bias);
  }
  rng.fill(p.attn_weight);
  rng.fill(p.attn_bias);
  rng.fill(p.output.bias);
  return p;
}

std::vector<WithinClipBlock> random_blocks(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::vector<WithinClipBlock> blocks;
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < n; ++i) {
    blocks.push_back({random_deform(d, 4, seed * 31 + i),
                      {random_attention_params(d, rng, scale), random_attention_params(d, rng, scale)}});
  }
  return blocks;
}

std::vector<DenseArray> level_data(const FeaturePyramid& p) {
  std::vector<DenseArray> out;
  for (const auto& l : p.levels) out.push_back(l.data);
  return out;
}

TEST(FeaturePyramidTest, BuildAndValidate) {
  Rng rng(1);
  const FeaturePyramid p = build_pyramid(ClipFeatures(rng.array({2, 3, 8, 12})));
  EXPECT_EQ(p.levels[0].data.shape(), (Shape{2, 3, 2, 3}));
  EXPECT_EQ(p.levels[1].data.shape(), (Shape{2, 3, 4, 6}));
  EXPECT_NO_THROW(p.validate());
  EXPECT_THROW(build_pyramid(ClipFeatures(DenseArray({2, 3, 6, 8}))), DimensionError);
  FeaturePyramid bad = p;
  bad.levels.pop_back();
  EXPECT_THROW(bad.validate(), DimensionError);
  bad = p;
  bad.levels[1] = ClipFeatures(DenseArray({2, 3, 5, 6}));
  EXPECT_THROW(bad.validate(), DimensionError);
}

TEST(FeaturePyramidTest, ReferenceMappingKeepsCorners) {
  EXPECT_EQ(map_reference(0, 8, 2), 0.0);
  EXPECT_EQ(map_reference(7, 8, 2), 1.0);
  EXPECT_EQ(map_reference(1, 2, 8), 7.0);
  EXPECT_EQ(map_reference(3, 8, 8), 3.0);
  EXPECT_EQ(map_reference(0, 1, 4), 1.5);
}

TEST(MsDeformTest, ConstantPyramidDoubles) {
  const double c = 2.75;
  FeaturePyramid p;
  for (std::size_t l = 0; l < kPyramidLevels; ++l) p.levels.emplace_back(DenseArray({2, 1, 2u << l, 3u << l}, c));
  Rng rng(2);
  DeformParams params = initial_deform_params(1, 4, rng);
  for (std::size_t l = 0; l < kPyramidLevels; ++l) params.value[l] = Projection::identity(1);
  params.output = Projection::identity(1);
  const FeaturePyramid out = msdeform_simplified(p, params);
  for (const auto& lvl : out.levels)
    for (double v : lvl.data.data()) EXPECT_NEAR(v, c + c, 1e-14);
}

TEST(MsDeformTest, MatchesPerPixelOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const FeaturePyramid p = random_pyramid(2, 3, 2, 3, 10 + seed);
    const DeformParams params = random_deform(3, 2, 20 + seed);
    const FeaturePyramid out = msdeform_simplified(p, params);
    const auto expect = oracle::msdeform(level_data(p), params);
    for (std::size_t l = 0; l < kPyramidLevels; ++l) EXPECT_LT(max_abs_diff(out.levels[l].data, expect[l]), 1e-10);
  }
}

TEST(MsDeformTest, CapturedWeightsAreDistributions) {
  const FeaturePyramid p = random_pyramid(2, 3, 2, 3, 15);
  const DeformParams params = random_deform(3, 2, 25);
  DeformWeights weights;
  const FeaturePyramid out = msdeform_simplified(p, params, &weights);
  EXPECT_EQ(out.levels[2].data, msdeform_simplified(p, params).levels[2].data);
  for (std::size_t l = 0; l < kPyramidLevels; ++l) {
    const ClipFeatures& f = p.levels[l];
    ASSERT_EQ(weights[l].shape(), (Shape{2, f.height(), f.width(), 6}));
    for (std::size_t r = 0; r < weights[l].size() / 6; ++r) {
      double sum = 0.0;
      for (std::size_t s = 0; s < 6; ++s) sum += weights[l][r * 6 + s];
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(MsDeformTest, FramesStayIndependent) {
  const FeaturePyramid p = random_pyramid(3, 3, 1, 2, 30);
  const DeformParams params = random_deform(3, 4, 31);
  const FeaturePyramid base = msdeform_simplified(p, params);
  for (std::size_t frame = 0; frame < 3; ++frame) {
    FeaturePyramid q = p;
    for (auto& lvl : q.levels)
      for (std::size_t c = 0; c < 3; ++c) lvl.data(frame, c, 0, 0) += 5.0;
    const FeaturePyramid out = msdeform_simplified(q, params);
    for (std::size_t l = 0; l < kPyramidLevels; ++l) {
      const auto& a = out.levels[l].data;
      const auto& b = base.levels[l].data;
      const std::size_t per_frame = a.size() / 3;
      for (std::size_t t = 0; t < 3; ++t) {
        if (t == frame) continue;
        for (std::size_t i = t * per_frame; i < (t + 1) * per_frame; ++i) ASSERT_EQ(a[i], b[i]);
      }
    }
  }
}

TEST(MsDeformTest, RejectsMismatchedParameters) {
  const FeaturePyramid p = random_pyramid(2, 3, 1, 1, 32);
  EXPECT_THROW(msdeform_simplified(p, random_deform(4, 2, 33)), DimensionError);
}

TEST(WithinClipTest, ZeroBlocksIsIdentity) {
  const FeaturePyramid p = random_pyramid(2, 4, 2, 2, 40);
  EXPECT_EQ(level_data(within_clip_forward(p, {})), level_data(p));
}

TEST(WithinClipTest, TwoBlocksPreserveShapesAndAreDeterministic) {
  const FeaturePyramid p = random_pyramid(2, 4, 2, 2, 41);
  const auto blocks = random_blocks(2, 4, 42);
  const FeaturePyramid a = within_clip_forward(p, blocks);
  const FeaturePyramid b = within_clip_forward(p, random_blocks(2, 4, 42));
  for (std::size_t l = 0; l < kPyramidLevels; ++l) EXPECT_EQ(a.levels[l].data.shape(), p.levels[l].data.shape());
  EXPECT_EQ(level_data(a), level_data(b));
}

TEST(WithinClipTest, FiniteAcrossSeeds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FeaturePyramid p = random_pyramid(2, 4, 1, 2, 100 + seed);
    const FeaturePyramid out = within_clip_forward(p, random_blocks(2, 4, 200 + seed));
    for (std::size_t l = 0; l < kPyramidLevels; ++l) {
      EXPECT_EQ(out.levels[l].data.shape(), p.levels[l].data.shape());
      EXPECT_TRUE(all_finite(out.levels[l].data));
    }
  }
}

TEST(WithinClipTest, AxialPassesKeepLevelsSeparate) {
  const FeaturePyramid p = random_pyramid(2, 4, 2, 2, 50);
  auto blocks = random_blocks(1, 4, 51);
  // Silence the deformable step so only the axial passes run.
  blocks[0].deform.output = Projection::zero(4);
  const FeaturePyramid base = within_clip_forward(p, blocks);
  FeaturePyramid q = p;
  for (double& v : q.levels[0].data.data()) v += 1.0;
  const FeaturePyramid out = within_clip_forward(q, blocks);
  EXPECT_NE(out.levels[0].data, base.levels[0].data);
  EXPECT_EQ(out.levels[1].data, base.levels[1].data);
  EXPECT_EQ(out.levels[2].data, base.levels[2].data);
}

TEST(WithinClipTest, CaptureRecordsRequestedLevel) {
  const FeaturePyramid p = random_pyramid(2, 4, 1, 1, 60);
  FieldCapture cap;
  cap.block = 1;
  cap.level = 2;
  within_clip_forward(p, random_blocks(2, 4, 61), &cap);
  ASSERT_TRUE(cap.filled);
  // Height pass on the 4x4 level: B = W = 4, S = H = 4.
  EXPECT_EQ(cap.height.stage1_weights.shape(), (Shape{4, 1, 2, 4, 2, 4}));
  EXPECT_EQ(cap.width.stage1_weights.shape(), (Shape{4, 1, 2, 4, 2, 4}));
}

}  // namespace
}  // namespace axtrack
