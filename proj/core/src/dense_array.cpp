// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "axtrack/dense_array.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "axtrack/error.hpp"

namespace axtrack {

std::string shape_to_string(const Shape& shape) {
  return fmt::format("[{}]", fmt::join(shape, "x"));
}

std::size_t shape_volume(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

namespace {
void check_extents(const Shape& shape) {
  if (shape.empty()) throw DimensionError("DenseArray needs rank >= 1");
  for (std::size_t e : shape) {
    if (e == 0) throw DimensionError("zero extent in shape " + shape_to_string(shape));
  }
}
}  // namespace

DenseArray::DenseArray(Shape shape, double fill) : shape_(std::move(shape)) {
  check_extents(shape_);
  data_.assign(shape_volume(shape_), fill);
}

DenseArray::DenseArray(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_extents(shape_);
  if (data_.size() != shape_volume(shape_)) {
    throw DimensionError(fmt::format("data length {} does not match shape {}", data_.size(),
                                     shape_to_string(shape_)));
  }
}

DenseArray DenseArray::identity(std::size_t n) {
  DenseArray out({n, n});
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

std::size_t DenseArray::extent(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw DimensionError(fmt::format("axis {} out of range for shape {}", axis,
                                     shape_to_string(shape_)));
  }
  return shape_[axis];
}

std::size_t DenseArray::offset(std::initializer_list<std::size_t> idx) const {
  std::size_t off = 0;
  std::size_t axis = 0;
  for (std::size_t i : idx) {
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

DenseArray DenseArray::reshaped(Shape shape) const {
  if (shape_volume(shape) != data_.size()) {
    throw DimensionError(fmt::format("cannot reshape {} to {}", shape_to_string(shape_),
                                     shape_to_string(shape)));
  }
  return DenseArray(std::move(shape), data_);
}

}  // namespace axtrack
