// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>

#include "axtrack/error.hpp"
#include "axtrack/evaluation.hpp"

namespace axtrack {
namespace {

DenseArray box(std::size_t t0, std::size_t t1, std::size_t h0, std::size_t h1, std::size_t w0, std::size_t w1,
               Shape shape = {2, 4, 4}) {
  DenseArray m(shape);
  for (std::size_t t = t0; t < t1; ++t)
    for (std::size_t h = h0; h < h1; ++h)
      for (std::size_t w = w0; w < w1; ++w) m(t, h, w) = 1.0;
  return m;
}

Tube pred(DenseArray masks, int cls, std::size_t classes = 3) {
  Tube t;
  t.masks = std::move(masks);
  t.class_probs.assign(classes, 0.1 / static_cast<double>(classes - 1));
  t.class_probs[static_cast<std::size_t>(cls)] = 0.9;
  return t;
}

TEST(TubeIouTest, IdenticalAndDisjoint) {
  const DenseArray a = box(0, 2, 0, 2, 0, 2);
  EXPECT_EQ(tube_iou(a, a), 1.0);
  EXPECT_EQ(tube_iou(a, box(0, 2, 2, 4, 2, 4)), 0.0);
}

TEST(TubeIouTest, HandCountedOverlap) {
  // 8 voxels each, 4 shared.
  const DenseArray a = box(0, 2, 0, 2, 0, 2);
  const DenseArray b = box(0, 2, 1, 3, 0, 2);
  EXPECT_DOUBLE_EQ(tube_iou(a, b), 4.0 / 12.0);
  EXPECT_EQ(tube_iou(a, b), tube_iou(b, a));
}

TEST(TubeIouTest, EmptyUnion) {
  EXPECT_EQ(tube_iou(DenseArray({2, 4, 4}), DenseArray({2, 4, 4})), 1.0);
}

TEST(TubeIouTest, BinarizesStrictlyAboveThreshold) {
  DenseArray a({1, 1, 2}, std::vector<double>{0.5, 0.9});
  DenseArray b({1, 1, 2}, std::vector<double>{1.0, 1.0});
  EXPECT_EQ(tube_iou(a, b), 0.5);
}

TEST(TubeIouTest, RejectsSpanMismatch) {
  EXPECT_THROW(tube_iou(DenseArray({2, 4, 4}), DenseArray({3, 4, 4})), DimensionError);
}

GroundTruthSet gt_of(std::vector<std::pair<DenseArray, int>> items) {
  GroundTruthSet g;
  std::size_t id = 0;
  for (auto& [m, c] : items) g.tubes.push_back({std::move(m), c, id++});
  return g;
}

TEST(VpqTest, PerfectPredictions) {
  const GroundTruthSet g = gt_of({{box(0, 2, 0, 2, 0, 2), 0}, {box(0, 2, 2, 4, 2, 4), 2}});
  EXPECT_EQ(vpq({pred(box(0, 2, 0, 2, 0, 2), 0), pred(box(0, 2, 2, 4, 2, 4), 2)}, g), 1.0);
}

TEST(VpqTest, SpuriousPrediction) {
  const GroundTruthSet g = gt_of({{box(0, 2, 0, 2, 0, 2), 1}});
  const double v = vpq({pred(box(0, 2, 0, 2, 0, 2), 1), pred(box(0, 1, 3, 4, 3, 4), 1)}, g);
  EXPECT_DOUBLE_EQ(v, 1.0 / 1.5);
}

TEST(VpqTest, NoPredictions) {
  EXPECT_EQ(vpq({}, gt_of({{box(0, 2, 0, 2, 0, 2), 0}})), 0.0);
}

TEST(VpqTest, NothingAtAll) { EXPECT_EQ(vpq({}, GroundTruthSet{}), 1.0); }

TEST(VpqTest, EmptyPredictionsAreIgnored) {
  const GroundTruthSet g = gt_of({{box(0, 2, 0, 2, 0, 2), 0}});
  DenseArray half({2, 4, 4}, 0.5);
  EXPECT_EQ(vpq({pred(box(0, 2, 0, 2, 0, 2), 0), pred(half, 1)}, g), 1.0);
}

TEST(VpqTest, WrongClassCountsTwice) {
  const GroundTruthSet g = gt_of({{box(0, 2, 0, 2, 0, 2), 0}});
  // class 0: FN, class 1: FP -> both score 0.
  EXPECT_EQ(vpq({pred(box(0, 2, 0, 2, 0, 2), 1)}, g), 0.0);
}

TEST(VpqTest, DegradedMaskDropsBelowThreshold) {
  const GroundTruthSet g = gt_of({{box(0, 2, 0, 4, 0, 4), 0}});
  const double good = vpq({pred(box(0, 2, 0, 4, 0, 3), 0)}, g);  // IoU 0.75
  const double bad = vpq({pred(box(0, 2, 0, 4, 0, 2), 0)}, g);   // IoU 0.5, not above
  EXPECT_DOUBLE_EQ(good, 0.75);
  EXPECT_EQ(bad, 0.0);
  EXPECT_LE(bad, good);
}

TEST(VpqTest, InvariantToPredictionOrder) {
  const GroundTruthSet g =
      gt_of({{box(0, 2, 0, 2, 0, 3), 0}, {box(0, 2, 2, 4, 0, 4), 0}, {box(0, 1, 0, 4, 3, 4), 1}});
  std::vector<Tube> p{pred(box(0, 2, 0, 2, 0, 2), 0), pred(box(0, 2, 2, 4, 1, 4), 0),
                      pred(box(0, 1, 0, 3, 3, 4), 1), pred(box(1, 2, 0, 1, 3, 4), 2)};
  const double base = vpq(p, g);
  EXPECT_GT(base, 0.0);
  EXPECT_LT(base, 1.0);
  const auto by_mask = [](const Tube& a, const Tube& b) { return a.masks.values() < b.masks.values(); };
  std::sort(p.begin(), p.end(), by_mask);
  int orders = 0;
  do {
    EXPECT_EQ(vpq(p, g), base);
    ++orders;
  } while (std::next_permutation(p.begin(), p.end(), by_mask));
  EXPECT_EQ(orders, 24);
}

TEST(VpqTest, RejectsNonBinaryGroundTruth) {
  GroundTruthSet g = gt_of({{DenseArray({1, 2, 2}, 0.3), 0}});
  EXPECT_THROW(vpq({}, g), NumericError);
}

}  // namespace
}  // namespace axtrack
