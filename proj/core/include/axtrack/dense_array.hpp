// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace axtrack {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_volume(const Shape& shape);

// Row-major rank-N array of doubles. Every extent is at least one and
// data().size() always equals the product of the extents.
class DenseArray {
 public:
  DenseArray() = default;
  explicit DenseArray(Shape shape, double fill = 0.0);
  DenseArray(Shape shape, std::vector<double> data);

  static DenseArray zeros(Shape shape) { return DenseArray(std::move(shape)); }
  static DenseArray identity(std::size_t n);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t extent(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t flat) { return data_[flat]; }
  const double& operator[](std::size_t flat) const { return data_[flat]; }

  template <typename... I>
  double& operator()(I... idx) {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }
  template <typename... I>
  const double& operator()(I... idx) const {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  std::size_t offset(std::initializer_list<std::size_t> idx) const;

  // Same data, new extents; the volume must match.
  DenseArray reshaped(Shape shape) const;

  bool operator==(const DenseArray& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

}  // namespace axtrack
