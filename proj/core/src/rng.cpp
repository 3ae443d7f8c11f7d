// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "axtrack/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace axtrack {

double Rng::unit() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::gaussian(double sigma) {
  if (has_spare_) {
    has_spare_ = false;
    return sigma * spare_;
  }
  // Box-Muller; u1 is kept away from zero so the log stays finite.
  double u1 = 0.0;
  do {
    u1 = unit();
  } while (u1 == 0.0);
  const double u2 = unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return sigma * r * std::cos(theta);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = 0;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::draw() {
  if (distribution_ == Distribution::kGaussian) return gaussian(param_);
  return uniform(-param_, param_);
}

void Rng::fill(DenseArray& a) {
  for (double& v : a.data()) v = draw();
}

DenseArray Rng::array(Shape shape) {
  DenseArray a(std::move(shape));
  fill(a);
  return a;
}

}  // namespace axtrack
