// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "axtrack/tensor_ops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "axtrack/error.hpp"

namespace axtrack {

namespace {

void require_rank(const DenseArray& a, std::size_t rank, const char* what) {
  if (a.rank() != rank) {
    throw DimensionError(fmt::format("{}: expected rank {}, got shape {}", what, rank,
                                     shape_to_string(a.shape())));
  }
}

}  // namespace

DenseArray matmul(const DenseArray& a, const DenseArray& b) {
  require_rank(a, 2, "matmul lhs");
  require_rank(b, 2, "matmul rhs");
  const std::size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
  if (b.extent(0) != k) {
    throw DimensionError(fmt::format("matmul: inner extents differ, {} vs {}",
                                     shape_to_string(a.shape()), shape_to_string(b.shape())));
  }
  DenseArray c({m, n});
  // i-k-j order; every c[i][j] still accumulates over k ascending.
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = &c[i * n];
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double aik = a[i * k + kk];
      const double* brow = &b[kk * n];
      for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

DenseArray transpose(const DenseArray& a) {
  require_rank(a, 2, "transpose");
  return permute(a, {1, 0});
}

DenseArray permute(const DenseArray& a, const std::vector<std::size_t>& axes) {
  const std::size_t rank = a.rank();
  if (axes.size() != rank) {
    throw DimensionError(fmt::format("permute: {} axes for shape {}", axes.size(),
                                     shape_to_string(a.shape())));
  }
  std::vector<bool> seen(rank, false);
  Shape out_shape(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    if (axes[i] >= rank || seen[axes[i]]) throw DimensionError("permute: invalid axis list");
    seen[axes[i]] = true;
    out_shape[i] = a.extent(axes[i]);
  }
  std::vector<std::size_t> in_strides(rank, 1);
  for (std::size_t i = rank - 1; i > 0; --i) in_strides[i - 1] = in_strides[i] * a.extent(i);

  DenseArray out(out_shape);
  std::vector<std::size_t> idx(rank, 0);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    std::size_t src = 0;
    for (std::size_t i = 0; i < rank; ++i) src += idx[i] * in_strides[axes[i]];
    out[flat] = a[src];
    for (std::size_t i = rank; i-- > 0;) {
      if (++idx[i] < out_shape[i]) break;
      idx[i] = 0;
    }
  }
  return out;
}

double order_invariant_sum(std::span<double> terms) {
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double v : terms) total += v;
  return total;
}

void softmax_inplace(std::span<double> slice) {
  if (slice.empty()) throw DimensionError("softmax over an empty axis");
  const double peak = *std::max_element(slice.begin(), slice.end());
  thread_local std::vector<double> scratch;
  scratch.resize(slice.size());
  for (std::size_t i = 0; i < slice.size(); ++i) {
    slice[i] = std::exp(slice[i] - peak);
    scratch[i] = slice[i];
  }
  const double total = order_invariant_sum(scratch);
  for (double& v : slice) v /= total;
}

DenseArray softmax_last(const DenseArray& x) {
  if (x.empty()) throw DimensionError("softmax_last on an empty array");
  const std::size_t s = x.shape().back();
  DenseArray out = x;
  for (std::size_t off = 0; off < out.size(); off += s) softmax_inplace(out.data().subspan(off, s));
  return out;
}

DenseArray layer_norm(const DenseArray& x, const DenseArray& gamma, const DenseArray& beta,
                      double eps) {
  const std::size_t d = x.shape().back();
  if (gamma.size() != d || beta.size() != d) {
    throw DimensionError(fmt::format("layer_norm: gamma/beta length {}/{} for channel extent {}",
                                     gamma.size(), beta.size(), d));
  }
  DenseArray out(x.shape());
  for (std::size_t off = 0; off < x.size(); off += d) {
    double mean = 0.0;
    for (std::size_t c = 0; c < d; ++c) mean += x[off + c];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double dev = x[off + c] - mean;
      var += dev * dev;
    }
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < d; ++c) {
      out[off + c] = (x[off + c] - mean) * inv * gamma[c] + beta[c];
    }
  }
  return out;
}

DenseArray atrous_conv1d(const DenseArray& x, const DenseArray& kernel, int rate) {
  require_rank(x, 2, "atrous_conv1d input");
  require_rank(kernel, 3, "atrous_conv1d kernel");
  const std::size_t taps = kernel.extent(0);
  if (taps % 2 == 0) throw ConfigError(fmt::format("atrous_conv1d: kernel size {} is even", taps));
  if (rate < 1) throw ConfigError(fmt::format("atrous_conv1d: rate {} < 1", rate));
  const std::size_t len = x.extent(0), d_in = x.extent(1), d_out = kernel.extent(1);
  if (kernel.extent(2) != d_in) {
    throw DimensionError(fmt::format("atrous_conv1d: kernel {} does not fit input {}",
                                     shape_to_string(kernel.shape()), shape_to_string(x.shape())));
  }
  const auto half = static_cast<std::ptrdiff_t>(taps / 2);
  DenseArray y({len, d_out});
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t j = 0; j < taps; ++j) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t) +
                                 (static_cast<std::ptrdiff_t>(j) - half) * rate;
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(len)) continue;
      const double* xs = &x[static_cast<std::size_t>(src) * d_in];
      for (std::size_t o = 0; o < d_out; ++o) {
        const double* kr = &kernel[(j * d_out + o) * d_in];
        double acc = 0.0;
        for (std::size_t i = 0; i < d_in; ++i) acc += kr[i] * xs[i];
        y(t, o) += acc;
      }
    }
  }
  return y;
}

DenseArray bilinear_sample(const DenseArray& feature,
                           std::span<const std::array<double, 2>> points) {
  require_rank(feature, 3, "bilinear_sample feature");
  const std::size_t d = feature.extent(0), h = feature.extent(1), w = feature.extent(2);
  if (points.empty()) return DenseArray{};
  DenseArray out({points.size(), d});
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double y = points[p][0], x = points[p][1];
    const double y0f = std::floor(y), x0f = std::floor(x);
    const double fy = y - y0f, fx = x - x0f;
    const auto y0 = static_cast<long long>(y0f), x0 = static_cast<long long>(x0f);
    const double wts[4] = {(1 - fy) * (1 - fx), (1 - fy) * fx, fy * (1 - fx), fy * fx};
    const long long ys[4] = {y0, y0, y0 + 1, y0 + 1};
    const long long xs[4] = {x0, x0 + 1, x0, x0 + 1};
    for (int c = 0; c < 4; ++c) {
      if (ys[c] < 0 || xs[c] < 0 || ys[c] >= static_cast<long long>(h) ||
          xs[c] >= static_cast<long long>(w) || wts[c] == 0.0) {
        continue;
      }
      const auto yy = static_cast<std::size_t>(ys[c]), xx = static_cast<std::size_t>(xs[c]);
      for (std::size_t ch = 0; ch < d; ++ch) out(p, ch) += wts[c] * feature(ch, yy, xx);
    }
  }
  return out;
}

DenseArray linear(const DenseArray& x, const DenseArray& weight, const DenseArray* bias) {
  require_rank(x, 2, "linear input");
  require_rank(weight, 2, "linear weight");
  const std::size_t n = x.extent(0), d_in = x.extent(1), d_out = weight.extent(0);
  if (weight.extent(1) != d_in) {
    throw DimensionError(fmt::format("linear: weight {} does not fit input {}",
                                     shape_to_string(weight.shape()), shape_to_string(x.shape())));
  }
  if (bias != nullptr && bias->size() != d_out) {
    throw DimensionError(fmt::format("linear: bias length {} for output width {}", bias->size(), d_out));
  }
  DenseArray y({n, d_out});
  for (std::size_t r = 0; r < n; ++r) {
    const double* xr = &x[r * d_in];
    for (std::size_t o = 0; o < d_out; ++o) {
      const double* wr = &weight[o * d_in];
      double acc = 0.0;
      for (std::size_t i = 0; i < d_in; ++i) acc += wr[i] * xr[i];
      y(r, o) = bias != nullptr ? acc + (*bias)[o] : acc;
    }
  }
  return y;
}

DenseArray add(const DenseArray& a, const DenseArray& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(fmt::format("add: shapes {} and {} differ", shape_to_string(a.shape()),
                                     shape_to_string(b.shape())));
  }
  DenseArray out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

DenseArray scale(const DenseArray& a, double s) {
  DenseArray out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

bool all_finite(const DenseArray& a) {
  return std::all_of(a.data().begin(), a.data().end(), [](double v) { return std::isfinite(v); });
}

void require_finite(const DenseArray& a, const char* what) {
  if (!all_finite(a)) throw NumericError(fmt::format("{}: non-finite value in input", what));
}

double max_abs_diff(const DenseArray& a, const DenseArray& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(fmt::format("max_abs_diff: shapes {} and {} differ",
                                     shape_to_string(a.shape()), shape_to_string(b.shape())));
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace axtrack
