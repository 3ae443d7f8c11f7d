// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0
//
// Ordered flat reports, written as `key = value` text and as a JSON object
// with the same keys in the same order.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace axtrack::cli {

// Shortest round-trip decimal; integral values keep a trailing ".0".
std::string format_double(double v);

class Report {
 public:
  using Value = std::variant<bool, std::int64_t, std::uint64_t, double, std::string>;

  void add(std::string key, bool v) { put(std::move(key), v); }
  void add(std::string key, double v) { put(std::move(key), v); }
  void add(std::string key, std::string v) { put(std::move(key), std::move(v)); }
  void add(std::string key, const char* v) { put(std::move(key), std::string(v)); }
  template <typename I, std::enable_if_t<std::is_integral_v<I> && !std::is_same_v<I, bool>, int> = 0>
  void add(std::string key, I v) {
    if constexpr (std::is_signed_v<I>) {
      put(std::move(key), static_cast<std::int64_t>(v));
    } else {
      put(std::move(key), static_cast<std::uint64_t>(v));
    }
  }

  const Value* find(std::string_view key) const;
  const std::vector<std::pair<std::string, Value>>& entries() const { return entries_; }

  std::string text() const;
  std::string json() const;
  // report.txt and report.json; IoError on failure.
  void write(const std::filesystem::path& dir) const;

 private:
  void put(std::string key, Value v);
  std::vector<std::pair<std::string, Value>> entries_;
};

}  // namespace axtrack::cli
