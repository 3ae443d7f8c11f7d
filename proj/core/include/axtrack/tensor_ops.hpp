// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <span>
#include <vector>

#include "axtrack/dense_array.hpp"

namespace axtrack {

// c[i][j] = sum_k a[i][k] * b[k][j], k ascending.
DenseArray matmul(const DenseArray& a, const DenseArray& b);

DenseArray transpose(const DenseArray& a);

// Generic axis permutation: out.shape[i] = in.shape[axes[i]].
DenseArray permute(const DenseArray& a, const std::vector<std::size_t>& axes);

// Sum whose result does not depend on the order of `terms`: the span is
// sorted in place and then added smallest first. Used for reductions over
// attended axes so that permuting that axis permutes outputs exactly.
double order_invariant_sum(std::span<double> terms);

// Softmax over the trailing axis, max-subtracted, with an order-invariant
// normalizer.
DenseArray softmax_last(const DenseArray& x);
// In-place softmax of one contiguous slice.
void softmax_inplace(std::span<double> slice);

// Per trailing slice: (x - mean) / sqrt(var + eps) * gamma + beta, with the
// population variance.
DenseArray layer_norm(const DenseArray& x, const DenseArray& gamma, const DenseArray& beta,
                      double eps);

// Zero-padded dilated convolution along the leading axis of x[L x D] with
// kernel[k x D_out x D_in] (k odd): y_t = sum_j kernel_j . x_{t + (j - (k-1)/2) * rate}.
DenseArray atrous_conv1d(const DenseArray& x, const DenseArray& kernel, int rate);

// Bilinear interpolation of feature[D x H x W] at continuous (y, x) points.
// Corners outside the grid read zero. Returns P x D (an empty array when
// no points are given).
DenseArray bilinear_sample(const DenseArray& feature, std::span<const std::array<double, 2>> points);

// Rows of x[n x D_in] mapped through weight[D_out x D_in] plus optional bias:
// y = x W^T + b.
DenseArray linear(const DenseArray& x, const DenseArray& weight, const DenseArray* bias = nullptr);

DenseArray add(const DenseArray& a, const DenseArray& b);
DenseArray scale(const DenseArray& a, double s);

bool all_finite(const DenseArray& a);
void require_finite(const DenseArray& a, const char* what);
double max_abs_diff(const DenseArray& a, const DenseArray& b);

}  // namespace axtrack
