// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0
//
// Axial-trajectory attention over dense clip features.
//
// A trajectory pass works on a sequence laid out as B x T x S x D, where T is
// time, S is the attended spatial axis and B is the spatial axis that is left
// alone (a pure batch axis). For every reference point (t, s) it first pools
// values along S in each target frame t' (the trajectory point), then
// re-projects those points and attends over t' to produce the update.
//
// The clip-level wrappers reshape T x D x H x W features so that S = H
// (height pass, B = W) or S = W (width pass, B = H), and wrap the pass in a
// pre-norm residual: out = x + pass(LN(x)).

#pragma once

#include <cstddef>
#include <optional>

#include "axtrack/dense_array.hpp"
#include "axtrack/mac_counter.hpp"
#include "axtrack/rng.hpp"

namespace axtrack {

// Affine map y = W x + b with W: D x D, b: length D.
struct Projection {
  DenseArray weight;
  DenseArray bias;

  static Projection identity(std::size_t d);
  static Projection zero(std::size_t d);
};

struct ProjectionWeights {
  Projection query;
  Projection key;
  Projection value;
};

struct NormParams {
  DenseArray gamma;
  DenseArray beta;
  double eps = 1e-5;

  static NormParams unit(std::size_t d);
};

struct AttentionParams {
  ProjectionWeights first;   // q, k, v for pooling along the attended axis
  ProjectionWeights second;  // re-projection of trajectory points
  NormParams norm;           // pre-norm of the residual wrapper
  double scale = 1.0;        // multiplies every <q, k>
  std::size_t heads = 1;

  std::size_t dim() const { return first.query.weight.extent(0); }
  // Throws DimensionError / ConfigError when the matrices do not all match d.
  void validate(std::size_t d) const;
};

// Independent parameters for the height pass and the width pass.
struct AxialParams {
  AttentionParams height;
  AttentionParams width;
};

// Weights uniform in (-range, range), zero biases, unit norm.
AttentionParams random_attention_params(std::size_t d, Rng& rng, double scale,
                                        std::size_t heads = 1, double range = -1.0);

// Dense clip features, T x D x H x W.
struct ClipFeatures {
  DenseArray data;

  ClipFeatures() = default;
  explicit ClipFeatures(DenseArray d);

  std::size_t frames() const { return data.extent(0); }
  std::size_t channels() const { return data.extent(1); }
  std::size_t height() const { return data.extent(2); }
  std::size_t width() const { return data.extent(3); }
};

// Both stages' weights and the pooled trajectory points of one pass.
//   values:         B x T x T' x S x D   (trajectory points, t' is the target frame)
//   stage1_weights: B x heads x T x S x T' x S'  (softmax over S')
//   stage2_weights: B x heads x T x S x T'       (softmax over T')
struct TrajectoryField {
  DenseArray values;
  DenseArray stage1_weights;
  DenseArray stage2_weights;
};

struct TrajectoryPassResult {
  DenseArray out;  // B x T x S x D
  TrajectoryField field;
};

// The raw two-stage trajectory pass on a B x T x S x D sequence (no norm,
// no residual).
TrajectoryPassResult trajectory_pass_1d(const DenseArray& seq, const AttentionParams& params,
                                        MacCounter* macs = nullptr);

// Reshape helpers between T x D x H x W and the B x T x S x D pass layout.
DenseArray to_height_sequence(const DenseArray& clip);  // W x T x H x D
DenseArray from_height_sequence(const DenseArray& seq);
DenseArray to_width_sequence(const DenseArray& clip);   // H x T x W x D
DenseArray from_width_sequence(const DenseArray& seq);

ClipFeatures axial_trajectory_h(const ClipFeatures& f, const AttentionParams& params,
                                TrajectoryField* field = nullptr, MacCounter* macs = nullptr);
ClipFeatures axial_trajectory_w(const ClipFeatures& f, const AttentionParams& params,
                                TrajectoryField* field = nullptr, MacCounter* macs = nullptr);

// Height pass followed by width pass.
ClipFeatures axial_trajectory(const ClipFeatures& f, const AxialParams& params,
                              MacCounter* macs = nullptr);

inline constexpr std::size_t kDefaultFullTrajectoryCap = 4096;

// Un-decomposed trajectory attention over the joint H*W axis, with the same
// pre-norm residual wrapper. Refuses T*H*W above `cap` with ResourceError.
ClipFeatures full_trajectory_reference(const ClipFeatures& f, const AttentionParams& params,
                                       std::size_t cap = kDefaultFullTrajectoryCap,
                                       MacCounter* macs = nullptr,
                                       TrajectoryField* field = nullptr);

// Gradients mirror the parameter layout they belong to.
struct ProjectionGrad {
  DenseArray weight;
  DenseArray bias;
};
struct AttentionGrads {
  ProjectionGrad first_query, first_key, first_value;
  ProjectionGrad second_query, second_key, second_value;
  DenseArray norm_gamma, norm_beta;
};

struct TrajectoryGradients {
  ClipFeatures input;
  AttentionGrads height;
  AttentionGrads width;
};

// Reverse-mode gradients of axial_trajectory (height then width pass) for
// the scalar sum(upstream * output).
TrajectoryGradients trajectory_backward(const ClipFeatures& f, const AxialParams& params,
                                        const ClipFeatures& upstream);

}  // namespace axtrack
