// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "axtrack/evaluation.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "axtrack/error.hpp"
#include "axtrack/tensor_ops.hpp"

namespace axtrack {

void GroundTruthSet::validate() const {
  for (std::size_t i = 0; i < tubes.size(); ++i) {
    const DenseArray& m = tubes[i].masks;
    if (m.rank() != 3 || m.shape() != tubes.front().masks.shape()) {
      throw DimensionError(fmt::format("ground-truth tube {} has shape {}", i, shape_to_string(m.shape())));
    }
    for (double v : m.data()) {
      if (v != 0.0 && v != 1.0) throw NumericError(fmt::format("ground-truth tube {} is not binary", i));
    }
  }
}

double tube_iou(const DenseArray& a, const DenseArray& b, double threshold) {
  if (a.shape() != b.shape()) {
    throw DimensionError(fmt::format("tube shapes differ: {} vs {}", shape_to_string(a.shape()),
                                     shape_to_string(b.shape())));
  }
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool x = a[i] > threshold, y = b[i] > threshold;
    inter += static_cast<std::size_t>(x && y);
    uni += static_cast<std::size_t>(x || y);
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double tube_iou(const Tube& a, const Tube& b, double threshold) { return tube_iou(a.masks, b.masks, threshold); }

int predicted_class(const Tube& t) {
  if (t.class_probs.empty()) throw DimensionError("tube has no class distribution");
  return static_cast<int>(std::max_element(t.class_probs.begin(), t.class_probs.end()) - t.class_probs.begin());
}

VpqResult vpq_detail(const std::vector<Tube>& preds, const GroundTruthSet& gts, double iou_thresh) {
  gts.validate();
  std::vector<std::pair<int, const DenseArray*>> kept;
  for (const Tube& p : preds) {
    if (std::none_of(p.masks.data().begin(), p.masks.data().end(), [](double v) { return v > kMaskThreshold; }))
      continue;
    kept.emplace_back(predicted_class(p), &p.masks);
  }
  std::set<int> classes;
  for (const auto& g : gts.tubes) classes.insert(g.class_id);
  for (const auto& k : kept) classes.insert(k.first);

  VpqResult res;
  if (classes.empty()) return res;
  double total = 0.0;
  for (int c : classes) {
    std::vector<const DenseArray*> p, g;
    for (const auto& k : kept)
      if (k.first == c) p.push_back(k.second);
    for (const auto& t : gts.tubes)
      if (t.class_id == c) g.push_back(&t.masks);
    ClassQuality q;
    if (!p.empty() && !g.empty()) {
      DenseArray iou({p.size(), g.size()});
      DenseArray cost({p.size(), g.size()});
      for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j) {
          iou(i, j) = tube_iou(*p[i], *g[j]);
          if (iou(i, j) > iou_thresh) cost(i, j) = -iou(i, j);
        }
      const Assignment a = hungarian(cost);
      std::vector<double> matched;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const std::ptrdiff_t j = a.row_to_col[i];
        if (j >= 0 && iou(i, static_cast<std::size_t>(j)) > iou_thresh) {
          ++q.tp;
          matched.push_back(iou(i, static_cast<std::size_t>(j)));
        }
      }
      // Independent of prediction order.
      q.iou_sum = order_invariant_sum(matched);
    }
    q.fp = p.size() - q.tp;
    q.fn = g.size() - q.tp;
    q.quality = q.iou_sum / (static_cast<double>(q.tp) + 0.5 * static_cast<double>(q.fp) +
                             0.5 * static_cast<double>(q.fn));
    total += q.quality;
    res.per_class[c] = q;
  }
  res.vpq = total / static_cast<double>(classes.size());
  return res;
}

double vpq(const std::vector<Tube>& preds, const GroundTruthSet& gts, double iou_thresh) {
  return vpq_detail(preds, gts, iou_thresh).vpq;
}

}  // namespace axtrack
