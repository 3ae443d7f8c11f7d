// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0
//
// Tube IoU and single-window video panoptic quality.

#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "axtrack/clip_segmenter.hpp"
#include "axtrack/dense_array.hpp"

namespace axtrack {

struct GroundTruthTube {
  DenseArray masks;  // span x H x W, binary
  int class_id = 0;
  std::size_t track_id = 0;
};

struct GroundTruthSet {
  std::vector<GroundTruthTube> tubes;

  // Binary masks, equal shapes.
  void validate() const;
};

inline constexpr double kMaskThreshold = 0.5;

// IoU over all voxels after binarizing both sides with v > threshold. Two
// empty tubes have IoU 1.
double tube_iou(const DenseArray& a, const DenseArray& b, double threshold = kMaskThreshold);
double tube_iou(const Tube& a, const Tube& b, double threshold = kMaskThreshold);

// Index of the largest probability (first on ties).
int predicted_class(const Tube& t);

struct ClassQuality {
  std::size_t tp = 0, fp = 0, fn = 0;
  double iou_sum = 0.0;
  double quality = 0.0;
};

struct VpqResult {
  double vpq = 1.0;
  std::map<int, ClassQuality> per_class;
};

// Per class, predictions are matched to ground truth by maximum total IoU
// over pairs with IoU > iou_thresh. Empty predictions are dropped. The class
// scores IoU_sum / (TP + FP/2 + FN/2) are averaged over every class seen in
// either set; with no classes at all the result is 1.
VpqResult vpq_detail(const std::vector<Tube>& preds, const GroundTruthSet& gts, double iou_thresh = 0.5);
double vpq(const std::vector<Tube>& preds, const GroundTruthSet& gts, double iou_thresh = 0.5);

}  // namespace axtrack
