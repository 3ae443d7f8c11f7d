// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "axtrack/clip_segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "axtrack/error.hpp"
#include "axtrack/tensor_ops.hpp"

namespace axtrack {

void ClipQuerySet::validate() const {
  if (queries.rank() != 2) {
    throw DimensionError(fmt::format("clip queries must be N x D, got {}", shape_to_string(queries.shape())));
  }
  require_finite(queries, "clip queries");
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<ClipFeatures> split_into_clips(const DenseArray& video, std::size_t clip_len) {
  if (clip_len < 2) throw ConfigError(fmt::format("clip length must be at least 2, got {}", clip_len));
  if (video.rank() != 4) {
    throw DimensionError(fmt::format("video must be L x D x H x W, got {}", shape_to_string(video.shape())));
  }
  const std::size_t L = video.extent(0);
  const std::size_t frame = video.size() / L;
  const std::size_t clips = (L + clip_len - 1) / clip_len;
  std::vector<ClipFeatures> out;
  out.reserve(clips);
  for (std::size_t k = 0; k < clips; ++k) {
    Shape shape = video.shape();
    shape[0] = clip_len;
    DenseArray clip(shape);
    for (std::size_t t = 0; t < clip_len; ++t) {
      const std::size_t src = std::min(k * clip_len + t, L - 1);
      std::copy_n(video.data().begin() + static_cast<std::ptrdiff_t>(src * frame), frame,
                  clip.data().begin() + static_cast<std::ptrdiff_t>(t * frame));
    }
    out.emplace_back(std::move(clip));
  }
  return out;
}

void DecoderLayerParams::validate(std::size_t d) const {
  const auto check = [d](const Projection& p, const char* name) {
    if (p.weight.shape() != Shape{d, d} || p.bias.shape() != Shape{d}) {
      throw DimensionError(fmt::format("decoder {} projection does not match D={}", name, d));
    }
  };
  check(cross.query, "cross query");
  check(cross.key, "cross key");
  check(cross.value, "cross value");
  check(cross_out, "cross output");
  check(self.query, "self query");
  check(self.key, "self key");
  check(self.value, "self value");
  check(self_out, "self output");
  for (const NormParams* n : {&cross_norm, &self_norm, &ffn_norm}) {
    if (n->gamma.shape() != Shape{d} || n->beta.shape() != Shape{d}) {
      throw DimensionError(fmt::format("decoder norm does not match D={}", d));
    }
  }
  if (ffn_w1.shape() != Shape{2 * d, d} || ffn_b1.shape() != Shape{2 * d} || ffn_w2.shape() != Shape{d, 2 * d} ||
      ffn_b2.shape() != Shape{d}) {
    throw DimensionError(fmt::format("decoder feed-forward does not match D={}", d));
  }
}

DecoderLayerParams random_decoder_layer(std::size_t d, Rng& rng, double range) {
  if (range <= 0.0) range = 1.0 / std::sqrt(static_cast<double>(d));
  auto proj = [&] {
    Projection p = Projection::zero(d);
    for (double& v : p.weight.data()) v = rng.uniform(-range, range);
    for (double& v : p.bias.data()) v = rng.uniform(-range, range);
    return p;
  };
  DecoderLayerParams p;
  p.cross = {proj(), proj(), proj()};
  p.cross_out = proj();
  p.self = {proj(), proj(), proj()};
  p.self_out = proj();
  p.cross_norm = p.self_norm = p.ffn_norm = NormParams::unit(d);
  p.ffn_w1 = DenseArray({2 * d, d});
  p.ffn_b1 = DenseArray({2 * d});
  p.ffn_w2 = DenseArray({d, 2 * d});
  p.ffn_b2 = DenseArray({d});
  for (DenseArray* a : {&p.ffn_w1, &p.ffn_b1, &p.ffn_w2, &p.ffn_b2})
    for (double& v : a->data()) v = rng.uniform(-range, range);
  return p;
}

namespace {

// Single-head attention of `from` rows onto `onto` rows, projected back
// through `out`.
DenseArray attend(const DenseArray& from, const DenseArray& onto, const ProjectionWeights& w,
                  const Projection& out, double scale, std::vector<DenseArray>* record) {
  const DenseArray q = linear(from, w.query.weight, &w.query.bias);
  const DenseArray k = linear(onto, w.key.weight, &w.key.bias);
  const DenseArray v = linear(onto, w.value.weight, &w.value.bias);
  const std::size_t n = q.extent(0), p = k.extent(0), d = q.extent(1);
  DenseArray pooled({n, d});
  DenseArray weights({n, p});
  std::vector<double> logits(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += q(i, c) * k(j, c);
      logits[j] = scale * s;
    }
    softmax_inplace(logits);
    for (std::size_t j = 0; j < p; ++j) {
      weights(i, j) = logits[j];
      for (std::size_t c = 0; c < d; ++c) pooled(i, c) += logits[j] * v(j, c);
    }
  }
  if (record != nullptr) record->push_back(std::move(weights));
  return linear(pooled, out.weight, &out.bias);
}

// T x D x H x W as (T*H*W) x D rows, pixel order (t, h, w).
DenseArray pixel_rows(const ClipFeatures& f) {
  const std::size_t T = f.frames(), D = f.channels(), HW = f.height() * f.width();
  DenseArray rows({T * HW, D});
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t c = 0; c < D; ++c)
      for (std::size_t p = 0; p < HW; ++p) rows(t * HW + p, c) = f.data[(t * D + c) * HW + p];
  return rows;
}

}  // namespace

ClipQuerySet decode_clip_queries(const ClipFeatures& f, const ClipQuerySet& init,
                                 const std::vector<DecoderLayerParams>& layers, double scale,
                                 DecoderWeights* weights) {
  init.validate();
  const std::size_t d = init.dim();
  if (f.channels() != d) {
    throw DimensionError(fmt::format("queries have D={} but clip features have D={}", d, f.channels()));
  }
  for (const auto& layer : layers) layer.validate(d);
  if (layers.empty()) return init;

  const DenseArray pixels = pixel_rows(f);
  DenseArray q = init.queries;
  for (const auto& layer : layers) {
    DenseArray x = layer_norm(q, layer.cross_norm.gamma, layer.cross_norm.beta, layer.cross_norm.eps);
    q = add(q, attend(x, pixels, layer.cross, layer.cross_out, scale, weights ? &weights->cross : nullptr));

    x = layer_norm(q, layer.self_norm.gamma, layer.self_norm.beta, layer.self_norm.eps);
    q = add(q, attend(x, x, layer.self, layer.self_out, scale, weights ? &weights->self : nullptr));

    x = layer_norm(q, layer.ffn_norm.gamma, layer.ffn_norm.beta, layer.ffn_norm.eps);
    DenseArray hidden = linear(x, layer.ffn_w1, &layer.ffn_b1);
    for (double& v : hidden.data()) v = std::max(v, 0.0);
    q = add(q, linear(hidden, layer.ffn_w2, &layer.ffn_b2));
  }
  require_finite(q, "decoded queries");
  return ClipQuerySet{std::move(q), init.clip_index};
}

std::vector<Tube> predict_clip_tubes(const ClipQuerySet& queries, const ClipFeatures& f,
                                     const DenseArray& class_head) {
  queries.validate();
  const std::size_t n = queries.count(), d = queries.dim();
  if (f.channels() != d || class_head.rank() != 2 || class_head.extent(0) != d) {
    throw DimensionError(fmt::format("queries {} do not match features {} / class head {}",
                                     shape_to_string(queries.queries.shape()),
                                     shape_to_string(f.data.shape()), shape_to_string(class_head.shape())));
  }
  const std::size_t T = f.frames(), H = f.height(), W = f.width(), HW = H * W;
  const std::size_t C = class_head.extent(1);
  std::vector<Tube> tubes;
  tubes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Tube tube;
    tube.masks = DenseArray({T, H, W});
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t p = 0; p < HW; ++p) {
        double logit = 0.0;
        for (std::size_t c = 0; c < d; ++c) logit += queries.queries(i, c) * f.data[(t * d + c) * HW + p];
        tube.masks[t * HW + p] = logistic(logit);
      }
    tube.class_probs.assign(C, 0.0);
    for (std::size_t k = 0; k < C; ++k)
      for (std::size_t c = 0; c < d; ++c) tube.class_probs[k] += class_head(c, k) * queries.queries(i, c);
    softmax_inplace(tube.class_probs);
    tube.track_id = i;
    tubes.push_back(std::move(tube));
  }
  return tubes;
}

namespace {

// Does a perfect matching exist on the free rows/cols using allowed edges?
bool has_perfect_matching(const std::vector<std::vector<char>>& allowed, const std::vector<char>& row_free,
                          const std::vector<char>& col_free) {
  const std::size_t n = allowed.size();
  std::vector<std::ptrdiff_t> match_col(n, -1);
  std::vector<char> seen(n);
  auto augment = [&](auto&& self, std::size_t r) -> bool {
    for (std::size_t c = 0; c < n; ++c) {
      if (!col_free[c] || !allowed[r][c] || seen[c]) continue;
      seen[c] = 1;
      if (match_col[c] < 0 || self(self, static_cast<std::size_t>(match_col[c]))) {
        match_col[c] = static_cast<std::ptrdiff_t>(r);
        return true;
      }
    }
    return false;
  };
  for (std::size_t r = 0; r < n; ++r) {
    if (!row_free[r]) continue;
    std::fill(seen.begin(), seen.end(), 0);
    if (!augment(augment, r)) return false;
  }
  return true;
}

}  // namespace

Assignment hungarian(const DenseArray& cost) {
  if (cost.empty()) return {};
  if (cost.rank() != 2) {
    throw DimensionError(fmt::format("cost matrix must be 2-D, got {}", shape_to_string(cost.shape())));
  }
  require_finite(cost, "hungarian cost");
  const std::size_t rows = cost.extent(0), cols = cost.extent(1), n = std::max(rows, cols);
  auto c = [&](std::size_t i, std::size_t j) { return (i < rows && j < cols) ? cost(i, j) : 0.0; };

  // Shortest augmenting path with potentials, 1-based.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  // Every perfect matching on the tight edges is optimal; pick the
  // lexicographically smallest one row by row.
  double magnitude = 0.0;
  for (double x : cost.data()) magnitude = std::max(magnitude, std::abs(x));
  const double tol = 1e-9 * (1.0 + magnitude);
  std::vector<std::vector<char>> tight(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) tight[i][j] = std::abs(c(i, j) - u[i + 1] - v[j + 1]) <= tol;

  std::vector<char> row_free(n, 1), col_free(n, 1);
  std::vector<std::size_t> chosen(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    row_free[i] = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!tight[i][j] || !col_free[j]) continue;
      col_free[j] = 0;
      if (has_perfect_matching(tight, row_free, col_free)) {
        chosen[i] = j;
        break;
      }
      col_free[j] = 1;
    }
    if (chosen[i] == n) {
      // Tolerance too tight for this matrix; fall back to the solver's matching.
      for (std::size_t j = 1; j <= n; ++j) chosen[p[j] - 1] = j - 1;
      break;
    }
  }

  Assignment a;
  a.row_to_col.assign(rows, -1);
  for (std::size_t i = 0; i < rows; ++i) {
    if (chosen[i] < cols) {
      a.row_to_col[i] = static_cast<std::ptrdiff_t>(chosen[i]);
      a.cost += cost(i, chosen[i]);
    }
  }
  return a;
}

Assignment associate_clips(const ClipQuerySet& prev, const ClipQuerySet& next) {
  prev.validate();
  next.validate();
  if (prev.queries.shape() != next.queries.shape()) {
    throw DimensionError(fmt::format("cannot associate queries {} with {}", shape_to_string(prev.queries.shape()),
                                     shape_to_string(next.queries.shape())));
  }
  const std::size_t n = prev.count(), d = prev.dim();
  auto norm = [d](const DenseArray& q, std::size_t i) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += q(i, c) * q(i, c);
    return std::sqrt(s);
  };
  DenseArray cost({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    const double ni = norm(prev.queries, i);
    for (std::size_t j = 0; j < n; ++j) {
      const double nj = norm(next.queries, j);
      if (ni == 0.0 || nj == 0.0) continue;
      double dot = 0.0;
      for (std::size_t c = 0; c < d; ++c) dot += prev.queries(i, c) * next.queries(j, c);
      cost(i, j) = -dot / (ni * nj);
    }
  }
  return hungarian(cost);
}

ClipQuerySet align_to(const ClipQuerySet& next, const Assignment& a) {
  const std::size_t n = next.count(), d = next.dim();
  if (a.row_to_col.size() != n) {
    throw DimensionError(fmt::format("assignment covers {} rows, queries have {}", a.row_to_col.size(), n));
  }
  ClipQuerySet out{DenseArray({n, d}), next.clip_index};
  for (std::size_t i = 0; i < n; ++i) {
    const std::ptrdiff_t j = a.row_to_col[i];
    if (j < 0) throw IndexError(fmt::format("row {} is unassigned", i));
    for (std::size_t c = 0; c < d; ++c) out.queries(i, c) = next.queries(static_cast<std::size_t>(j), c);
  }
  return out;
}

DenseArray concat_masks(const std::vector<DenseArray>& clip_masks, std::size_t frames) {
  if (clip_masks.empty()) throw DimensionError("no clip masks to concatenate");
  Shape shape = clip_masks.front().shape();
  const std::size_t per_frame = shape[1] * shape[2];
  shape[0] = frames;
  DenseArray out(shape);
  std::size_t t = 0;
  for (const DenseArray& m : clip_masks) {
    for (std::size_t s = 0; s < m.extent(0) && t < frames; ++s, ++t) {
      std::copy_n(m.data().begin() + static_cast<std::ptrdiff_t>(s * per_frame), per_frame,
                  out.data().begin() + static_cast<std::ptrdiff_t>(t * per_frame));
    }
  }
  if (t != frames) throw DimensionError(fmt::format("clips cover {} frames, expected {}", t, frames));
  return out;
}

NearOnlineResult run_near_online(const DenseArray& video, std::size_t clip_len, const SegmenterParams& params,
                                 const NearOnlineOptions& opts) {
  const std::vector<ClipFeatures> clips = split_into_clips(video, clip_len);
  NearOnlineResult res;
  res.frames = video.extent(0);
  const ClipQuerySet init{params.init_queries, 0};
  init.validate();
  for (std::size_t k = 0; k < clips.size(); ++k) {
    const FeaturePyramid pyr = within_clip_forward(build_pyramid(clips[k]), params.within);
    res.features.push_back(pyr.finest());
    ClipQuerySet q =
        decode_clip_queries(res.features.back(), ClipQuerySet{init.queries, k}, params.decoder, params.decoder_scale);
    if (k > 0 && opts.shuffle_seed) {
      Rng rng(*opts.shuffle_seed + k);
      const std::size_t n = q.count();
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
      Assignment perm;
      for (std::size_t i : order) perm.row_to_col.push_back(static_cast<std::ptrdiff_t>(i));
      q = align_to(q, perm);
    }
    if (k > 0) q = align_to(q, associate_clips(res.aligned.back(), q));
    res.clip_tubes.push_back(predict_clip_tubes(q, res.features.back(), params.class_head));
    res.aligned.push_back(std::move(q));
  }

  const std::size_t n = init.count(), K = clips.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<DenseArray> masks;
    Tube tube;
    tube.class_probs.assign(res.clip_tubes[0][i].class_probs.size(), 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      masks.push_back(res.clip_tubes[k][i].masks);
      for (std::size_t c = 0; c < tube.class_probs.size(); ++c)
        tube.class_probs[c] += res.clip_tubes[k][i].class_probs[c];
    }
    for (double& p : tube.class_probs) p /= static_cast<double>(K);
    tube.masks = concat_masks(masks, res.frames);
    tube.track_id = i;
    res.tubes.push_back(std::move(tube));
  }
  return res;
}

std::vector<Tube> near_online_inference(const DenseArray& video, std::size_t clip_len, const SegmenterParams& params,
                                        const NearOnlineOptions& opts) {
  return run_near_online(video, clip_len, params, opts).tubes;
}

}  // namespace axtrack
