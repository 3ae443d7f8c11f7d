// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace axtrack {

enum class ScaleMode { kInvSqrtD, kOne };

// Model and video extents. Text form: one `key = value` per line, `#`
// starts a comment, unknown keys are rejected.
struct ModelConfig {
  std::size_t video_len = 8;   // L
  std::size_t clip_len = 2;    // T
  std::size_t height = 32;     // H
  std::size_t width = 32;      // W
  std::size_t channels = 8;    // D
  std::size_t queries = 6;     // N
  std::size_t classes = 8;     // C
  std::size_t n_within = 2;
  std::size_t n_cross = 4;
  std::size_t heads = 1;
  std::size_t k_sample = 4;    // deformable sampling points per level
  std::array<int, 3> atrous_rates{1, 2, 3};
  ScaleMode scale_mode = ScaleMode::kInvSqrtD;
  std::uint64_t seed = 7;
  std::size_t objects = 3;
  std::size_t decoder_layers = 3;

  // Throws ConfigError.
  void validate() const;
  double attention_scale() const;

  // Applies one `key = value` setting; throws ConfigError on unknown keys or
  // malformed values.
  void set(std::string_view key, std::string_view value);

  static ModelConfig parse(std::string_view text);
  static ModelConfig load(const std::filesystem::path& path);
  std::string serialize() const;
};

std::string to_string(ScaleMode mode);

}  // namespace axtrack
