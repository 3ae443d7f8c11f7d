// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0
//
// Toy clip-level segmenter: a query decoder over clip features, mask and
// class heads, and Hungarian association of queries between consecutive
// non-overlapping clips.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "axtrack/dense_array.hpp"
#include "axtrack/trajectory_attention.hpp"
#include "axtrack/within_clip.hpp"

namespace axtrack {

// N x D object queries of clip `clip_index`.
struct ClipQuerySet {
  DenseArray queries;
  std::size_t clip_index = 0;

  std::size_t count() const { return queries.extent(0); }
  std::size_t dim() const { return queries.extent(1); }
  void validate() const;
};

struct Tube {
  DenseArray masks;                 // span x H x W, values in [0, 1]
  std::vector<double> class_probs;  // sums to 1
  std::size_t track_id = 0;

  std::size_t span() const { return masks.extent(0); }
};

// row_to_col[i] is the column matched to row i, or -1.
struct Assignment {
  std::vector<std::ptrdiff_t> row_to_col;
  double cost = 0.0;
};

// Splits L x D x H x W into ceil(L/T) clips of T frames, repeating the last
// frame to fill the final clip.
std::vector<ClipFeatures> split_into_clips(const DenseArray& video, std::size_t clip_len);

struct DecoderLayerParams {
  ProjectionWeights cross;  // q from queries, k/v from pixels
  Projection cross_out;
  ProjectionWeights self;
  Projection self_out;
  NormParams cross_norm, self_norm, ffn_norm;
  DenseArray ffn_w1;  // 2D x D
  DenseArray ffn_b1;  // 2D
  DenseArray ffn_w2;  // D x 2D
  DenseArray ffn_b2;  // D

  void validate(std::size_t d) const;
};

DecoderLayerParams random_decoder_layer(std::size_t d, Rng& rng, double range = -1.0);

// Each layer: cross-attention onto the T*H*W pixels, self-attention among
// queries, then a ReLU feed-forward; all pre-norm residual.
// Attention weights per layer: cross is N x (T*H*W), self is N x N.
struct DecoderWeights {
  std::vector<DenseArray> cross;
  std::vector<DenseArray> self;
};
ClipQuerySet decode_clip_queries(const ClipFeatures& f, const ClipQuerySet& init,
                                 const std::vector<DecoderLayerParams>& layers, double scale,
                                 DecoderWeights* weights = nullptr);

// Sigmoid masks from query . pixel and softmax(class_head^T query).
// class_head is D x C. Track ids are the query rows.
std::vector<Tube> predict_clip_tubes(const ClipQuerySet& queries, const ClipFeatures& f,
                                     const DenseArray& class_head);

// Minimum-cost assignment of an n x m matrix. Among optimal assignments the
// one whose row_to_col is lexicographically smallest is returned (unmatched
// rows sort after every column).
Assignment hungarian(const DenseArray& cost);

// Matches prev row i to next row row_to_col[i] with cost -cos(prev_i, next_j).
Assignment associate_clips(const ClipQuerySet& prev, const ClipQuerySet& next);

// next reordered so that row i continues prev row i.
ClipQuerySet align_to(const ClipQuerySet& next, const Assignment& a);

struct SegmenterParams {
  std::vector<WithinClipBlock> within;
  std::vector<DecoderLayerParams> decoder;
  double decoder_scale = 1.0;
  DenseArray init_queries;  // N x D
  DenseArray class_head;    // D x C
};

struct NearOnlineOptions {
  // When set, each clip's decoded queries are shuffled before association.
  std::optional<std::uint64_t> shuffle_seed;
};

struct NearOnlineResult {
  std::vector<Tube> tubes;                  // span L, ids 0..N-1
  std::vector<ClipFeatures> features;       // finest level per clip
  std::vector<ClipQuerySet> aligned;        // queries in track order per clip
  std::vector<std::vector<Tube>> clip_tubes;  // per clip, in track order
  std::size_t frames = 0;
};

NearOnlineResult run_near_online(const DenseArray& video, std::size_t clip_len,
                                 const SegmenterParams& params, const NearOnlineOptions& opts = {});

std::vector<Tube> near_online_inference(const DenseArray& video, std::size_t clip_len,
                                        const SegmenterParams& params,
                                        const NearOnlineOptions& opts = {});

// Concatenates per-clip masks into span-L tubes, dropping padded frames.
DenseArray concat_masks(const std::vector<DenseArray>& clip_masks, std::size_t frames);

double logistic(double x);

}  // namespace axtrack
