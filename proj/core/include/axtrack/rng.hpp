// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

#include "axtrack/dense_array.hpp"

namespace axtrack {

enum class Distribution { kUniform, kGaussian };

// Uniform draws cover (-param, param); Gaussian draws use sigma = param.
struct RngSpec {
  std::uint64_t seed = 0;
  Distribution distribution = Distribution::kUniform;
  double param = 1.0;
};

// Seeded stream with a platform-independent draw sequence. Only the raw
// mt19937_64 bit stream is used; the std:: distributions are
// implementation-defined and are avoided on purpose.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  explicit Rng(const RngSpec& spec)
      : engine_(spec.seed), distribution_(spec.distribution), param_(spec.param) {}

  std::uint64_t next_u64() { return engine_(); }
  // [0, 1) with 53 bits of resolution.
  double unit();
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  double gaussian(double sigma);
  // Integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  // Draw from the configured distribution.
  double draw();

  void fill(DenseArray& a);
  DenseArray array(Shape shape);

 private:
  std::mt19937_64 engine_;
  Distribution distribution_ = Distribution::kUniform;
  double param_ = 1.0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace axtrack
