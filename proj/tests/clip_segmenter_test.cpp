// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "axtrack/clip_segmenter.hpp"
#include "axtrack/error.hpp"
#include "axtrack/tensor_ops.hpp"
#include "oracles.hpp"

namespace axtrack {
namespace {

DenseArray ramp_video(std::size_t L, std::size_t D, std::size_t H, std::size_t W) {
  DenseArray v({L, D, H, W});
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  return v;
}

double frame_value(const ClipFeatures& c, std::size_t t) { return c.data(t, 0, 0, 0); }

TEST(SplitIntoClipsTest, EvenSplit) {
  const DenseArray v = ramp_video(4, 1, 1, 2);
  const auto clips = split_into_clips(v, 2);
  ASSERT_EQ(clips.size(), 2u);
  EXPECT_EQ(frame_value(clips[0], 1), 2.0);
  EXPECT_EQ(frame_value(clips[1], 0), 4.0);
  EXPECT_EQ(frame_value(clips[1], 1), 6.0);
}

TEST(SplitIntoClipsTest, DuplicatesLastFrame) {
  const auto clips = split_into_clips(ramp_video(3, 1, 1, 2), 2);
  ASSERT_EQ(clips.size(), 2u);
  EXPECT_EQ(frame_value(clips[1], 0), 4.0);
  EXPECT_EQ(frame_value(clips[1], 1), 4.0);
}

TEST(SplitIntoClipsTest, SingleClipIsIdentity) {
  const DenseArray v = ramp_video(2, 2, 2, 2);
  const auto clips = split_into_clips(v, 2);
  ASSERT_EQ(clips.size(), 1u);
  EXPECT_EQ(clips[0].data, v);
}

TEST(SplitIntoClipsTest, RejectsShortClips) {
  EXPECT_THROW(split_into_clips(ramp_video(4, 1, 1, 1), 1), ConfigError);
  EXPECT_THROW(split_into_clips(DenseArray({4, 2}), 2), DimensionError);
}

std::vector<DecoderLayerParams> random_layers(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<DecoderLayerParams> layers;
  for (std::size_t i = 0; i < n; ++i) layers.push_back(random_decoder_layer(d, rng));
  return layers;
}

TEST(DecoderTest, ZeroLayersIsIdentity) {
  Rng rng(1);
  const ClipFeatures f(rng.array({2, 4, 2, 3}));
  const ClipQuerySet q{rng.array({3, 4}), 5};
  const ClipQuerySet out = decode_clip_queries(f, q, {}, 0.5);
  EXPECT_EQ(out.queries, q.queries);
  EXPECT_EQ(out.clip_index, 5u);
}

TEST(DecoderTest, ZeroKeysGiveGlobalMean) {
  Rng rng(2);
  const std::size_t d = 3;
  const ClipFeatures f(rng.array({2, d, 2, 2}));
  const ClipQuerySet q{rng.array({2, d}), 0};
  DecoderLayerParams layer = random_decoder_layer(d, rng);
  layer.cross.key = Projection::zero(d);
  layer.cross.value = Projection::identity(d);
  layer.cross_out = Projection::identity(d);
  layer.self_out = Projection::zero(d);
  layer.ffn_w2 = DenseArray({d, 2 * d});
  layer.ffn_b2 = DenseArray({d});
  const ClipQuerySet out = decode_clip_queries(f, q, {layer}, 1.0);
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t t = 0; t < 2; ++t)
      for (std::size_t p = 0; p < 4; ++p) mean += f.data(t, c, p / 2, p % 2);
    mean /= 8.0;
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(out.queries(i, c), q.queries(i, c) + mean, 1e-12);
  }
}

TEST(DecoderTest, MatchesNaiveOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 100);
    const ClipFeatures f(rng.array({2, 4, 2, 3}));
    const ClipQuerySet q{rng.array({5, 4}), 0};
    const auto layers = random_layers(3, 4, seed);
    const ClipQuerySet out = decode_clip_queries(f, q, layers, 0.5);
    EXPECT_LT(max_abs_diff(out.queries, oracle::decoder(f.data, q.queries, layers, 0.5)), 1e-10);
  }
}

TEST(DecoderTest, CapturedWeightsAreDistributions) {
  Rng rng(7);
  const ClipFeatures f(rng.array({2, 4, 2, 3}));
  const ClipQuerySet q{rng.array({5, 4}), 0};
  const auto layers = random_layers(2, 4, 8);
  DecoderWeights w;
  const ClipQuerySet out = decode_clip_queries(f, q, layers, 0.5, &w);
  EXPECT_EQ(out.queries, decode_clip_queries(f, q, layers, 0.5).queries);
  ASSERT_EQ(w.cross.size(), 2u);
  ASSERT_EQ(w.self.size(), 2u);
  for (std::size_t l = 0; l < 2; ++l) {
    ASSERT_EQ(w.cross[l].shape(), (Shape{5, 12}));
    ASSERT_EQ(w.self[l].shape(), (Shape{5, 5}));
    for (const DenseArray* a : {&w.cross[l], &w.self[l]})
      for (std::size_t i = 0; i < 5; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < a->extent(1); ++j) sum += (*a)(i, j);
        EXPECT_NEAR(sum, 1.0, 1e-12);
      }
  }
}

TEST(DecoderTest, RejectsMismatchedChannels) {
  Rng rng(3);
  const ClipFeatures f(rng.array({2, 4, 2, 2}));
  EXPECT_THROW(decode_clip_queries(f, ClipQuerySet{rng.array({2, 3}), 0}, {}, 1.0), DimensionError);
  EXPECT_THROW(decode_clip_queries(f, ClipQuerySet{rng.array({2, 4}), 0}, random_layers(1, 3, 1), 1.0),
               DimensionError);
}

TEST(PredictTubesTest, OrthogonalQueryGivesHalf) {
  DenseArray feat({2, 2, 2, 2});
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t p = 0; p < 4; ++p) feat(t, 0, p / 2, p % 2) = 1.0 + static_cast<double>(p);
  const ClipQuerySet q{DenseArray({1, 2}, std::vector<double>{0.0, 3.0}), 0};
  const auto tubes = predict_clip_tubes(q, ClipFeatures(feat), DenseArray::identity(2));
  ASSERT_EQ(tubes.size(), 1u);
  for (double v : tubes[0].masks.data()) EXPECT_EQ(v, 0.5);
}

TEST(PredictTubesTest, OneHotObjectsSeparate) {
  DenseArray feat({2, 3, 4, 4});
  for (std::size_t t = 0; t < 2; ++t) {
    feat(t, 1, 1, 1) = feat(t, 1, 1, 2) = 1.0;
    feat(t, 2, 3, 3) = 1.0;
  }
  DenseArray q({2, 3});
  q(0, 1) = 10.0;
  q(1, 2) = 10.0;
  const auto tubes = predict_clip_tubes(ClipQuerySet{q, 0}, ClipFeatures(feat), DenseArray::identity(3));
  for (std::size_t i = 0; i < 2; ++i) {
    const std::size_t color = i + 1;
    for (std::size_t t = 0; t < 2; ++t)
      for (std::size_t h = 0; h < 4; ++h)
        for (std::size_t w = 0; w < 4; ++w) {
          const double m = tubes[i].masks(t, h, w);
          if (feat(t, color, h, w) == 1.0) {
            EXPECT_GT(m, 0.99);
          } else {
            EXPECT_LT(m, 0.5 + 1e-15);
          }
        }
    EXPECT_EQ(tubes[i].track_id, i);
  }
}

TEST(PredictTubesTest, ClassProbsNormalized) {
  Rng rng(4);
  const auto tubes =
      predict_clip_tubes(ClipQuerySet{rng.array({4, 3}), 0}, ClipFeatures(rng.array({2, 3, 2, 2})), rng.array({3, 5}));
  for (const Tube& t : tubes) {
    double s = 0.0;
    for (double p : t.class_probs) s += p;
    EXPECT_NEAR(s, 1.0, 1e-9);
    for (double m : t.masks.data()) {
      EXPECT_GE(m, 0.0);
      EXPECT_LE(m, 1.0);
    }
  }
}

TEST(HungarianTest, IdentityFavoring) {
  DenseArray c({4, 4}, 1.0);
  for (std::size_t i = 0; i < 4; ++i) c(i, i) = 0.0;
  const Assignment a = hungarian(c);
  EXPECT_EQ(a.row_to_col, (std::vector<std::ptrdiff_t>{0, 1, 2, 3}));
  EXPECT_EQ(a.cost, 0.0);
}

TEST(HungarianTest, AntiDiagonal) {
  const Assignment a = hungarian(DenseArray({2, 2}, std::vector<double>{1, 0, 0, 1}));
  EXPECT_EQ(a.row_to_col, (std::vector<std::ptrdiff_t>{1, 0}));
  EXPECT_EQ(a.cost, 0.0);
}

TEST(HungarianTest, EmptyMatrix) {
  const Assignment a = hungarian(DenseArray());
  EXPECT_TRUE(a.row_to_col.empty());
  EXPECT_EQ(a.cost, 0.0);
}

TEST(HungarianTest, TiesBreakTowardLowIndices) {
  const Assignment a = hungarian(DenseArray({3, 3}, 2.0));
  EXPECT_EQ(a.row_to_col, (std::vector<std::ptrdiff_t>{0, 1, 2}));
  // Two optimal matchings; row 0 takes the lower column.
  const Assignment b = hungarian(DenseArray({2, 2}, std::vector<double>{1, 1, 1, 1}));
  EXPECT_EQ(b.row_to_col, (std::vector<std::ptrdiff_t>{0, 1}));
}

TEST(HungarianTest, MatchesExhaustiveSearch) {
  Rng rng(5);
  for (std::size_t n = 2; n <= 6; ++n) {
    for (int trial = 0; trial < 100; ++trial) {
      DenseArray c({n, n});
      for (double& v : c.data()) v = rng.uniform(-1.0, 1.0);
      const Assignment got = hungarian(c);
      const Assignment want = oracle::brute_force_assignment(c);
      ASSERT_EQ(got.row_to_col, want.row_to_col) << "n=" << n << " trial=" << trial;
      ASSERT_EQ(got.cost, want.cost);
    }
  }
}

TEST(HungarianTest, IntegerTiesMatchExhaustiveSearch) {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(4);
    DenseArray c({n, n});
    for (double& v : c.data()) v = static_cast<double>(rng.below(3));
    const Assignment got = hungarian(c);
    const Assignment want = oracle::brute_force_assignment(c);
    ASSERT_EQ(got.row_to_col, want.row_to_col);
    ASSERT_EQ(got.cost, want.cost);
  }
}

TEST(HungarianTest, RectangularMatchesExhaustiveSearch) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(5), m = 1 + rng.below(5);
    DenseArray c({n, m});
    for (double& v : c.data()) v = rng.uniform(-2.0, 2.0);
    const Assignment got = hungarian(c);
    const Assignment want = oracle::brute_force_assignment(c);
    ASSERT_EQ(got.row_to_col, want.row_to_col);
    ASSERT_EQ(got.cost, want.cost);
    EXPECT_EQ(static_cast<std::size_t>(std::count_if(got.row_to_col.begin(), got.row_to_col.end(),
                                                     [](std::ptrdiff_t j) { return j >= 0; })),
              std::min(n, m));
  }
}

TEST(HungarianTest, RejectsNonFinite) {
  DenseArray c({2, 2});
  c(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(hungarian(c), NumericError);
}

TEST(AssociateTest, IdenticalQueriesGiveIdentity) {
  Rng rng(8);
  const ClipQuerySet q{rng.array({5, 4}), 0};
  EXPECT_EQ(associate_clips(q, q).row_to_col, (std::vector<std::ptrdiff_t>{0, 1, 2, 3, 4}));
}

TEST(AssociateTest, RecoversPermutation) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 6, d = 8;
    const ClipQuerySet prev{rng.array({n, d}), 0};
    std::vector<std::size_t> pi(n);
    std::iota(pi.begin(), pi.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(pi[i - 1], pi[rng.below(i)]);
    // next row j holds prev row pi[j].
    ClipQuerySet next{DenseArray({n, d}), 1};
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t c = 0; c < d; ++c) next.queries(j, c) = prev.queries(pi[j], c);
    const Assignment a = associate_clips(prev, next);
    for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(a.row_to_col[pi[j]], static_cast<std::ptrdiff_t>(j));
    EXPECT_EQ(align_to(next, a).queries, prev.queries);
  }
}

TEST(AssociateTest, StableUnderSmallNoise) {
  Rng rng(10);
  const std::size_t n = 4;
  ClipQuerySet prev{DenseArray::identity(n), 0};
  ClipQuerySet next = prev;
  for (double& v : next.queries.data()) v += rng.uniform(-0.004, 0.004);
  EXPECT_EQ(associate_clips(prev, next).row_to_col, (std::vector<std::ptrdiff_t>{0, 1, 2, 3}));
}

TEST(AssociateTest, ZeroNormQueryIsOrthogonal) {
  DenseArray p({2, 2}), n({2, 2});
  p(0, 0) = 1.0;
  n(1, 0) = 1.0;
  const Assignment a = associate_clips(ClipQuerySet{p, 0}, ClipQuerySet{n, 1});
  EXPECT_EQ(a.row_to_col, (std::vector<std::ptrdiff_t>{1, 0}));
  EXPECT_EQ(a.cost, -1.0);
}

TEST(AssociateTest, RejectsMismatchedShapes) {
  EXPECT_THROW(associate_clips(ClipQuerySet{DenseArray({2, 3}), 0}, ClipQuerySet{DenseArray({3, 3}), 1}),
               DimensionError);
}

SegmenterParams random_segmenter(std::size_t d, std::size_t n, std::size_t classes, std::uint64_t seed) {
  Rng rng(seed);
  SegmenterParams p;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (int b = 0; b < 1; ++b) {
    p.within.push_back({initial_deform_params(d, 2, rng),
                        {random_attention_params(d, rng, scale), random_attention_params(d, rng, scale)}});
  }
  p.decoder.push_back(random_decoder_layer(d, rng));
  p.decoder_scale = scale;
  p.init_queries = DenseArray({n, d});
  for (double& v : p.init_queries.data()) v = rng.gaussian(1.0);
  p.class_head = rng.array({d, classes});
  return p;
}

TEST(NearOnlineTest, SingleClipMatchesClipTubes) {
  Rng rng(11);
  const DenseArray video = rng.array({2, 4, 4, 4});
  const SegmenterParams params = random_segmenter(4, 3, 2, 12);
  const NearOnlineResult res = run_near_online(video, 2, params);
  ASSERT_EQ(res.tubes.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(res.tubes[i].track_id, i);
    EXPECT_EQ(res.tubes[i].masks, res.clip_tubes[0][i].masks);
    EXPECT_EQ(res.tubes[i].class_probs, res.clip_tubes[0][i].class_probs);
  }
}

TEST(NearOnlineTest, OutputSpansVideoLength) {
  Rng rng(13);
  const DenseArray video = rng.array({5, 4, 4, 4});
  const auto tubes = near_online_inference(video, 2, random_segmenter(4, 3, 2, 14));
  for (const Tube& t : tubes) {
    EXPECT_EQ(t.masks.shape(), (Shape{5, 4, 4}));
    double s = 0.0;
    for (double p : t.class_probs) s += p;
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(NearOnlineTest, ShuffledQueriesGiveIdenticalTubes) {
  Rng rng(15);
  const DenseArray video = rng.array({6, 4, 4, 4});
  const SegmenterParams params = random_segmenter(4, 5, 3, 16);
  const auto base = near_online_inference(video, 2, params);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    NearOnlineOptions opts;
    opts.shuffle_seed = seed;
    const auto shuffled = near_online_inference(video, 2, params, opts);
    ASSERT_EQ(shuffled.size(), base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      EXPECT_EQ(shuffled[i].masks, base[i].masks);
      EXPECT_EQ(shuffled[i].class_probs, base[i].class_probs);
      EXPECT_EQ(shuffled[i].track_id, base[i].track_id);
    }
  }
}

}  // namespace
}  // namespace axtrack
