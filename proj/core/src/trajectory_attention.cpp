// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "axtrack/trajectory_attention.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <fmt/format.h>

#include "axtrack/error.hpp"
#include "axtrack/tensor_ops.hpp"

namespace axtrack {

Projection Projection::identity(std::size_t d) {
  return {DenseArray::identity(d), DenseArray({d})};
}

Projection Projection::zero(std::size_t d) { return {DenseArray({d, d}), DenseArray({d})}; }

NormParams NormParams::unit(std::size_t d) { return {DenseArray({d}, 1.0), DenseArray({d}), 1e-5}; }

namespace {

void check_projection(const Projection& p, std::size_t d, const char* name) {
  if (p.weight.shape() != Shape{d, d} || p.bias.shape() != Shape{d}) {
    throw DimensionError(fmt::format("{} projection is {} / {}, expected {}x{} / {}", name,
                                     shape_to_string(p.weight.shape()),
                                     shape_to_string(p.bias.shape()), d, d, d));
  }
}

}  // namespace

void AttentionParams::validate(std::size_t d) const {
  check_projection(first.query, d, "first query");
  check_projection(first.key, d, "first key");
  check_projection(first.value, d, "first value");
  check_projection(second.query, d, "second query");
  check_projection(second.key, d, "second key");
  check_projection(second.value, d, "second value");
  if (norm.gamma.shape() != Shape{d} || norm.beta.shape() != Shape{d}) {
    throw DimensionError(fmt::format("norm parameters do not match channel count {}", d));
  }
  if (heads == 0 || d % heads != 0) {
    throw ConfigError(fmt::format("{} heads do not divide {} channels", heads, d));
  }
}

AttentionParams random_attention_params(std::size_t d, Rng& rng, double scale, std::size_t heads,
                                        double range) {
  if (range <= 0.0) range = 1.0 / std::sqrt(static_cast<double>(d));
  auto proj = [&] {
    Projection p = Projection::zero(d);
    for (double& v : p.weight.data()) v = rng.uniform(-range, range);
    return p;
  };
  AttentionParams p;
  p.first = {proj(), proj(), proj()};
  p.second = {proj(), proj(), proj()};
  p.norm = NormParams::unit(d);
  p.scale = scale;
  p.heads = heads;
  return p;
}

ClipFeatures::ClipFeatures(DenseArray d) : data(std::move(d)) {
  if (data.rank() != 4) {
    throw DimensionError("clip features must be T x D x H x W, got " +
                         shape_to_string(data.shape()));
  }
}

namespace {

struct PassDims {
  std::size_t batch, frames, span, channels, heads, head_dim;
};

PassDims pass_dims(const DenseArray& seq, const AttentionParams& params) {
  if (seq.rank() != 4) {
    throw DimensionError("trajectory pass expects B x T x S x D, got " +
                         shape_to_string(seq.shape()));
  }
  const std::size_t d = seq.extent(3);
  params.validate(d);
  return {seq.extent(0), seq.extent(1), seq.extent(2), d, params.heads, d / params.heads};
}

// Intermediates of one raw pass, kept for the backward sweep.
struct PassCache {
  PassDims dims{};
  DenseArray input;   // (B*T*S) x D
  DenseArray q, k, v;  // (B*T*S) x D
  DenseArray traj;     // B x T x T' x S x D
  DenseArray traj_diag;  // (B*T*S) x D, rows traj[b, t, t, s]
  DenseArray q2;       // (B*T*S) x D
  DenseArray k2, v2;   // (B*T*T'*S) x D
  DenseArray a1;       // B x G x T x S x T' x S'
  DenseArray a2;       // B x G x T x S x T'
};

void count(MacCounter* macs, std::uint64_t MacCounter::*field, std::uint64_t n) {
  if (macs != nullptr) macs->*field += n;
}

// Multiplies performed by linear(): one D_in dot product per output entry.
std::uint64_t linear_macs(const DenseArray& out, const Projection& p) { return out.size() * p.weight.extent(1); }

DenseArray run_pass(const DenseArray& seq, const AttentionParams& params, MacCounter* macs,
                    PassCache& c) {
  const PassDims dm = pass_dims(seq, params);
  require_finite(seq, "trajectory pass");
  const auto [B, T, S, D, G, dh] = dm;
  c.dims = dm;
  const std::size_t rows = B * T * S;

  c.input = seq.reshaped({rows, D});
  c.q = linear(c.input, params.first.query.weight, &params.first.query.bias);
  c.k = linear(c.input, params.first.key.weight, &params.first.key.bias);
  c.v = linear(c.input, params.first.value.weight, &params.first.value.bias);
  count(macs, &MacCounter::projections, linear_macs(c.q, params.first.query) + linear_macs(c.k, params.first.key) +
                                            linear_macs(c.v, params.first.value));

  // Stage 1: per reference (t, s) and target frame t', softmax over s'.
  c.a1 = DenseArray({B, G, T, S, T, S});
  c.traj = DenseArray({B, T, T, S, D});
  std::vector<double> scores(S), terms(S);
  std::uint64_t n_scores = 0, n_values = 0;
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t g = 0; g < G; ++g) {
      const std::size_t c0 = g * dh;
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t s = 0; s < S; ++s) {
          const double* qv = &c.q[((b * T + t) * S + s) * D + c0];
          for (std::size_t tp = 0; tp < T; ++tp) {
            for (std::size_t sp = 0; sp < S; ++sp) {
              const double* kv = &c.k[((b * T + tp) * S + sp) * D + c0];
              double acc = 0.0;
              for (std::size_t ch = 0; ch < dh; ++ch) acc += qv[ch] * kv[ch];
              n_scores += dh;
              scores[sp] = params.scale * acc;
            }
            softmax_inplace(scores);
            double* w = &c.a1[((((b * G + g) * T + t) * S + s) * T + tp) * S];
            std::copy(scores.begin(), scores.end(), w);
            double* out = &c.traj[(((b * T + t) * T + tp) * S + s) * D + c0];
            for (std::size_t ch = 0; ch < dh; ++ch) {
              for (std::size_t sp = 0; sp < S; ++sp) {
                terms[sp] = scores[sp] * c.v[((b * T + tp) * S + sp) * D + c0 + ch];
              }
              out[ch] = order_invariant_sum(terms);
              n_values += S;
            }
          }
        }
      }
    }
  }
  count(macs, &MacCounter::stage1_scores, n_scores);
  count(macs, &MacCounter::stage1_values, n_values);

  // Stage 2 projections. The query comes from the diagonal t' = t.
  c.traj_diag = DenseArray({rows, D});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t s = 0; s < S; ++s) {
        const double* src = &c.traj[(((b * T + t) * T + t) * S + s) * D];
        double* dst = &c.traj_diag[((b * T + t) * S + s) * D];
        for (std::size_t ch = 0; ch < D; ++ch) dst[ch] = src[ch];
      }
    }
  }
  const DenseArray traj_rows = c.traj.reshaped({B * T * T * S, D});
  c.q2 = linear(c.traj_diag, params.second.query.weight, &params.second.query.bias);
  c.k2 = linear(traj_rows, params.second.key.weight, &params.second.key.bias);
  c.v2 = linear(traj_rows, params.second.value.weight, &params.second.value.bias);
  count(macs, &MacCounter::projections, linear_macs(c.q2, params.second.query) +
                                            linear_macs(c.k2, params.second.key) +
                                            linear_macs(c.v2, params.second.value));

  // Stage 2: per (t, s), softmax over t'.
  c.a2 = DenseArray({B, G, T, S, T});
  DenseArray out({B, T, S, D});
  std::vector<double> tscores(T);
  n_scores = n_values = 0;
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t g = 0; g < G; ++g) {
      const std::size_t c0 = g * dh;
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t s = 0; s < S; ++s) {
          const double* qv = &c.q2[((b * T + t) * S + s) * D + c0];
          for (std::size_t tp = 0; tp < T; ++tp) {
            const double* kv = &c.k2[(((b * T + t) * T + tp) * S + s) * D + c0];
            double acc = 0.0;
            for (std::size_t ch = 0; ch < dh; ++ch) acc += qv[ch] * kv[ch];
            n_scores += dh;
            tscores[tp] = params.scale * acc;
          }
          softmax_inplace(tscores);
          double* w = &c.a2[(((b * G + g) * T + t) * S + s) * T];
          double* o = &out[((b * T + t) * S + s) * D + c0];
          for (std::size_t tp = 0; tp < T; ++tp) {
            w[tp] = tscores[tp];
            const double* vv = &c.v2[(((b * T + t) * T + tp) * S + s) * D + c0];
            for (std::size_t ch = 0; ch < dh; ++ch) o[ch] += tscores[tp] * vv[ch];
            n_values += dh;
          }
        }
      }
    }
  }
  count(macs, &MacCounter::stage2_scores, n_scores);
  count(macs, &MacCounter::stage2_values, n_values);
  return out;
}

// dW += dY^T X, db += sum rows dY, dX += dY W.
void projection_backward(const DenseArray& x, const DenseArray& dy, const Projection& p,
                         ProjectionGrad& grad, DenseArray& dx) {
  const std::size_t rows = x.extent(0), d = x.extent(1);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = &x[r * d];
    const double* gr = &dy[r * d];
    double* dxr = &dx[r * d];
    for (std::size_t o = 0; o < d; ++o) {
      const double go = gr[o];
      grad.bias[o] += go;
      double* wrow = &grad.weight[o * d];
      const double* prow = &p.weight[o * d];
      for (std::size_t i = 0; i < d; ++i) {
        wrow[i] += go * xr[i];
        dxr[i] += go * prow[i];
      }
    }
  }
}

ProjectionGrad zero_grad(std::size_t d) { return {DenseArray({d, d}), DenseArray({d})}; }

AttentionGrads zero_attention_grads(std::size_t d) {
  return {zero_grad(d), zero_grad(d), zero_grad(d), zero_grad(d),
          zero_grad(d), zero_grad(d), DenseArray({d}), DenseArray({d})};
}

// Returns d(input) of the raw pass, accumulating parameter gradients.
DenseArray pass_backward(const PassCache& c, const AttentionParams& params, const DenseArray& dout,
                         AttentionGrads& grads) {
  const auto [B, T, S, D, G, dh] = c.dims;
  const std::size_t rows = B * T * S;

  DenseArray dq2({rows, D});
  DenseArray dk2({B * T * T * S, D});
  DenseArray dv2({B * T * T * S, D});
  std::vector<double> da(std::max(T, S));
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t g = 0; g < G; ++g) {
      const std::size_t c0 = g * dh;
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t s = 0; s < S; ++s) {
          const std::size_t ref = (b * T + t) * S + s;
          const double* go = &dout[ref * D + c0];
          const double* w = &c.a2[(((b * G + g) * T + t) * S + s) * T];
          double dot = 0.0;
          for (std::size_t tp = 0; tp < T; ++tp) {
            const std::size_t row = ((b * T + t) * T + tp) * S + s;
            const double* vv = &c.v2[row * D + c0];
            double acc = 0.0;
            for (std::size_t ch = 0; ch < dh; ++ch) {
              acc += go[ch] * vv[ch];
              dv2[row * D + c0 + ch] += w[tp] * go[ch];
            }
            da[tp] = acc;
            dot += w[tp] * acc;
          }
          const double* qv = &c.q2[ref * D + c0];
          for (std::size_t tp = 0; tp < T; ++tp) {
            const double ds = w[tp] * (da[tp] - dot) * params.scale;
            const std::size_t row = ((b * T + t) * T + tp) * S + s;
            const double* kv = &c.k2[row * D + c0];
            for (std::size_t ch = 0; ch < dh; ++ch) {
              dq2[ref * D + c0 + ch] += ds * kv[ch];
              dk2[row * D + c0 + ch] += ds * qv[ch];
            }
          }
        }
      }
    }
  }

  const DenseArray traj_rows = c.traj.reshaped({B * T * T * S, D});
  DenseArray dtraj({B * T * T * S, D});
  DenseArray dtraj_diag({rows, D});
  projection_backward(c.traj_diag, dq2, params.second.query, grads.second_query, dtraj_diag);
  projection_backward(traj_rows, dk2, params.second.key, grads.second_key, dtraj);
  projection_backward(traj_rows, dv2, params.second.value, grads.second_value, dtraj);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t s = 0; s < S; ++s) {
        const double* src = &dtraj_diag[((b * T + t) * S + s) * D];
        double* dst = &dtraj[(((b * T + t) * T + t) * S + s) * D];
        for (std::size_t ch = 0; ch < D; ++ch) dst[ch] += src[ch];
      }
    }
  }

  DenseArray dq({rows, D}), dk({rows, D}), dv({rows, D});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t g = 0; g < G; ++g) {
      const std::size_t c0 = g * dh;
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t s = 0; s < S; ++s) {
          const std::size_t ref = (b * T + t) * S + s;
          const double* qv = &c.q[ref * D + c0];
          for (std::size_t tp = 0; tp < T; ++tp) {
            const double* gy = &dtraj[(((b * T + t) * T + tp) * S + s) * D + c0];
            const double* w = &c.a1[((((b * G + g) * T + t) * S + s) * T + tp) * S];
            double dot = 0.0;
            for (std::size_t sp = 0; sp < S; ++sp) {
              const std::size_t key = (b * T + tp) * S + sp;
              const double* vv = &c.v[key * D + c0];
              double acc = 0.0;
              for (std::size_t ch = 0; ch < dh; ++ch) {
                acc += gy[ch] * vv[ch];
                dv[key * D + c0 + ch] += w[sp] * gy[ch];
              }
              da[sp] = acc;
              dot += w[sp] * acc;
            }
            for (std::size_t sp = 0; sp < S; ++sp) {
              const double ds = w[sp] * (da[sp] - dot) * params.scale;
              const std::size_t key = (b * T + tp) * S + sp;
              const double* kv = &c.k[key * D + c0];
              for (std::size_t ch = 0; ch < dh; ++ch) {
                dq[ref * D + c0 + ch] += ds * kv[ch];
                dk[key * D + c0 + ch] += ds * qv[ch];
              }
            }
          }
        }
      }
    }
  }

  DenseArray dinput({rows, D});
  projection_backward(c.input, dq, params.first.query, grads.first_query, dinput);
  projection_backward(c.input, dk, params.first.key, grads.first_key, dinput);
  projection_backward(c.input, dv, params.first.value, grads.first_value, dinput);
  return dinput;
}

// y = x + pass(LN(x)) on a B x T x S x D sequence.
DenseArray residual_pass(const DenseArray& seq, const AttentionParams& params, MacCounter* macs,
                         TrajectoryField* field, PassCache& cache) {
  const std::size_t d = seq.extent(seq.rank() - 1);
  params.validate(d);
  require_finite(seq, "trajectory pass");
  const DenseArray normed = layer_norm(seq, params.norm.gamma, params.norm.beta, params.norm.eps);
  DenseArray out = add(seq, run_pass(normed, params, macs, cache));
  if (field != nullptr) *field = {cache.traj, cache.a1, cache.a2};
  return out;
}

DenseArray residual_backward(const DenseArray& seq, const AttentionParams& params,
                             const PassCache& cache, const DenseArray& dy, AttentionGrads& grads) {
  const std::size_t d = seq.extent(3);
  const std::size_t rows = seq.size() / d;
  const DenseArray dnormed = pass_backward(cache, params, dy.reshaped({rows, d}), grads);

  DenseArray dx = dy;
  std::vector<double> xhat(d), dxhat(d);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = &seq[r * d];
    double mean = 0.0;
    for (std::size_t ch = 0; ch < d; ++ch) mean += x[ch];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t ch = 0; ch < d; ++ch) var += (x[ch] - mean) * (x[ch] - mean);
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + params.norm.eps);
    double mean_g = 0.0, mean_gx = 0.0;
    for (std::size_t ch = 0; ch < d; ++ch) {
      xhat[ch] = (x[ch] - mean) * inv;
      const double g = dnormed[r * d + ch];
      grads.norm_gamma[ch] += g * xhat[ch];
      grads.norm_beta[ch] += g;
      dxhat[ch] = g * params.norm.gamma[ch];
      mean_g += dxhat[ch];
      mean_gx += dxhat[ch] * xhat[ch];
    }
    mean_g /= static_cast<double>(d);
    mean_gx /= static_cast<double>(d);
    for (std::size_t ch = 0; ch < d; ++ch) {
      dx[r * d + ch] += inv * (dxhat[ch] - mean_g - xhat[ch] * mean_gx);
    }
  }
  return dx;
}

void require_clip(const ClipFeatures& f) {
  if (f.data.rank() != 4) {
    throw DimensionError("clip features must be T x D x H x W, got " +
                         shape_to_string(f.data.shape()));
  }
}

}  // namespace

TrajectoryPassResult trajectory_pass_1d(const DenseArray& seq, const AttentionParams& params,
                                        MacCounter* macs) {
  PassCache cache;
  DenseArray out = run_pass(seq, params, macs, cache);
  return {std::move(out), {std::move(cache.traj), std::move(cache.a1), std::move(cache.a2)}};
}

DenseArray to_height_sequence(const DenseArray& clip) { return permute(clip, {3, 0, 2, 1}); }
DenseArray from_height_sequence(const DenseArray& seq) { return permute(seq, {1, 3, 2, 0}); }
DenseArray to_width_sequence(const DenseArray& clip) { return permute(clip, {2, 0, 3, 1}); }
DenseArray from_width_sequence(const DenseArray& seq) { return permute(seq, {1, 3, 0, 2}); }

ClipFeatures axial_trajectory_h(const ClipFeatures& f, const AttentionParams& params,
                                TrajectoryField* field, MacCounter* macs) {
  require_clip(f);
  PassCache cache;
  const DenseArray out = residual_pass(to_height_sequence(f.data), params, macs, field, cache);
  return ClipFeatures(from_height_sequence(out));
}

ClipFeatures axial_trajectory_w(const ClipFeatures& f, const AttentionParams& params,
                                TrajectoryField* field, MacCounter* macs) {
  require_clip(f);
  PassCache cache;
  const DenseArray out = residual_pass(to_width_sequence(f.data), params, macs, field, cache);
  return ClipFeatures(from_width_sequence(out));
}

ClipFeatures axial_trajectory(const ClipFeatures& f, const AxialParams& params, MacCounter* macs) {
  return axial_trajectory_w(axial_trajectory_h(f, params.height, nullptr, macs), params.width,
                            nullptr, macs);
}

ClipFeatures full_trajectory_reference(const ClipFeatures& f, const AttentionParams& params,
                                       std::size_t cap, MacCounter* macs, TrajectoryField* field) {
  require_clip(f);
  const std::size_t T = f.frames(), D = f.channels(), H = f.height(), W = f.width();
  if (T * H * W > cap) {
    throw ResourceError(fmt::format(
        "full trajectory reference refuses T*H*W = {} above the cap of {}", T * H * W, cap));
  }
  // T x D x H x W -> 1 x T x (H*W) x D: the joint spatial axis is attended.
  const DenseArray seq = permute(f.data, {0, 2, 3, 1}).reshaped({1, T, H * W, D});
  PassCache cache;
  const DenseArray out = residual_pass(seq, params, macs, field, cache);
  return ClipFeatures(permute(out.reshaped({T, H, W, D}), {0, 3, 1, 2}));
}

TrajectoryGradients trajectory_backward(const ClipFeatures& f, const AxialParams& params,
                                        const ClipFeatures& upstream) {
  require_clip(f);
  require_clip(upstream);
  if (f.data.shape() != upstream.data.shape()) {
    throw DimensionError(fmt::format("upstream cotangent {} does not match features {}",
                                     shape_to_string(upstream.data.shape()),
                                     shape_to_string(f.data.shape())));
  }
  const std::size_t d = f.channels();

  PassCache cache_h, cache_w;
  const DenseArray seq_h = to_height_sequence(f.data);
  const DenseArray mid = from_height_sequence(residual_pass(seq_h, params.height, nullptr, nullptr, cache_h));
  const DenseArray seq_w = to_width_sequence(mid);
  residual_pass(seq_w, params.width, nullptr, nullptr, cache_w);

  TrajectoryGradients grads{ClipFeatures{}, zero_attention_grads(d), zero_attention_grads(d)};
  const DenseArray dseq_w =
      residual_backward(seq_w, params.width, cache_w, to_width_sequence(upstream.data), grads.width);
  const DenseArray dmid = from_width_sequence(dseq_w);
  const DenseArray dseq_h = residual_backward(seq_h, params.height, cache_h,
                                              to_height_sequence(dmid), grads.height);
  grads.input = ClipFeatures(from_height_sequence(dseq_h));
  return grads;
}

}  // namespace axtrack
