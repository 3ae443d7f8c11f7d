// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "axtrack/harness/synthetic.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "axtrack/error.hpp"
#include "axtrack/rng.hpp"

namespace axtrack {
namespace {

struct Range {
  long lo, hi;  // inclusive
};

// Start coordinates for which [start, start + size) stays inside [0, extent)
// over frames 0..frames-1 at velocity v.
Range start_range(std::size_t size, long v, std::size_t frames, std::size_t extent) {
  const long travel = v * static_cast<long>(frames - 1);
  const long lo = std::max(0L, -travel);
  const long hi = static_cast<long>(extent) - static_cast<long>(size) - std::max(0L, travel);
  return {lo, hi};
}

bool overlap(long a0, std::size_t as, long b0, std::size_t bs) {
  return a0 < b0 + static_cast<long>(bs) && b0 < a0 + static_cast<long>(as);
}

}  // namespace

SyntheticVideo generate_synthetic(const SyntheticVideoSpec& spec) {
  if (spec.frames < 1 || spec.height < 1 || spec.width < 1 || spec.channels < 1) {
    throw ConfigError("synthetic video extents must be at least 1");
  }
  std::set<std::size_t> colors;
  for (const ObjectSpec& o : spec.objects) {
    if (o.height < 1 || o.width < 1) throw ConfigError("object size must be at least 1x1");
    if (o.color >= spec.channels) {
      throw ConfigError(fmt::format("object colour {} needs more than {} channels", o.color, spec.channels));
    }
    if (!colors.insert(o.color).second) throw ConfigError(fmt::format("colour {} used twice", o.color));
    if (o.class_id < 0) throw ConfigError("class ids must be non-negative");
  }

  const std::size_t n = spec.objects.size();
  std::vector<Range> ry(n), rx(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ObjectSpec& o = spec.objects[i];
    ry[i] = start_range(o.height, o.dy, spec.frames, spec.height);
    rx[i] = start_range(o.width, o.dx, spec.frames, spec.width);
    if (ry[i].lo > ry[i].hi || rx[i].lo > rx[i].hi) {
      throw GenerationError(fmt::format("object {} ({}x{}, velocity {},{}) cannot stay inside {}x{} for {} frames",
                                        i, o.height, o.width, o.dy, o.dx, spec.height, spec.width, spec.frames));
    }
  }

  Rng rng(spec.seed);
  std::vector<std::array<long, 2>> starts(n);
  bool placed = false;
  for (std::size_t attempt = 0; attempt < spec.max_retries && !placed; ++attempt) {
    for (std::size_t i = 0; i < n; ++i) {
      starts[i] = {ry[i].lo + static_cast<long>(rng.below(static_cast<std::uint64_t>(ry[i].hi - ry[i].lo + 1))),
                   rx[i].lo + static_cast<long>(rng.below(static_cast<std::uint64_t>(rx[i].hi - rx[i].lo + 1)))};
    }
    placed = true;
    for (std::size_t t = 0; t < spec.frames && placed; ++t) {
      const long lt = static_cast<long>(t);
      for (std::size_t i = 0; i < n && placed; ++i)
        for (std::size_t j = i + 1; j < n && placed; ++j) {
          const ObjectSpec &a = spec.objects[i], &b = spec.objects[j];
          if (overlap(starts[i][0] + a.dy * lt, a.height, starts[j][0] + b.dy * lt, b.height) &&
              overlap(starts[i][1] + a.dx * lt, a.width, starts[j][1] + b.dx * lt, b.width)) {
            placed = false;
          }
        }
    }
  }
  if (!placed) {
    throw GenerationError(fmt::format("could not place {} non-overlapping objects in {} attempts", n,
                                      spec.max_retries));
  }

  SyntheticVideo out;
  out.starts = starts;
  out.video = DenseArray({spec.frames, spec.channels, spec.height, spec.width});
  for (std::size_t i = 0; i < n; ++i) {
    const ObjectSpec& o = spec.objects[i];
    GroundTruthTube tube{DenseArray({spec.frames, spec.height, spec.width}), o.class_id, i};
    for (std::size_t t = 0; t < spec.frames; ++t) {
      const long lt = static_cast<long>(t);
      const auto y0 = static_cast<std::size_t>(starts[i][0] + o.dy * lt);
      const auto x0 = static_cast<std::size_t>(starts[i][1] + o.dx * lt);
      for (std::size_t y = y0; y < y0 + o.height; ++y)
        for (std::size_t x = x0; x < x0 + o.width; ++x) {
          out.video(t, o.color, y, x) = 1.0;
          tube.masks(t, y, x) = 1.0;
        }
    }
    out.gt.tubes.push_back(std::move(tube));
  }
  return out;
}

SyntheticVideoSpec default_synthetic_spec(const ModelConfig& cfg) {
  SyntheticVideoSpec spec;
  spec.frames = cfg.video_len;
  spec.height = cfg.height;
  spec.width = cfg.width;
  spec.channels = cfg.channels;
  spec.seed = cfg.seed;
  Rng rng(cfg.seed ^ 0x5eedULL);
  const auto size_in = [&rng](std::size_t extent) {
    const std::size_t lo = std::max<std::size_t>(1, extent / 4);
    const std::size_t hi = std::max(lo, 3 * extent / 8);
    return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
  };
  for (std::size_t i = 0; i < cfg.objects; ++i) {
    ObjectSpec o;
    o.height = size_in(cfg.height);
    o.width = size_in(cfg.width);
    o.dy = static_cast<long>(rng.below(3)) - 1;
    o.dx = static_cast<long>(rng.below(3)) - 1;
    o.color = i;
    o.class_id = static_cast<int>(i % cfg.classes);
    spec.objects.push_back(o);
  }
  return spec;
}

}  // namespace axtrack
