// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0
//
// 8-bit binary PGM (P5) images.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "axtrack/dense_array.hpp"

namespace axtrack {

struct PgmImage {
  std::size_t width = 0, height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, maxval 255
};

std::string encode_pgm(const PgmImage& img);
PgmImage decode_pgm(const std::string& bytes);  // IoError on malformed input

void write_pgm(const std::filesystem::path& path, const PgmImage& img);  // IoError
PgmImage read_pgm(const std::filesystem::path& path);

// H x W values scaled to 0..255 by (v - min) / (max - min). A frame with
// max == min is written as all 255.
PgmImage normalized_image(const DenseArray& map);

// H x W mask as 0 / 255 with v > threshold.
PgmImage mask_image(const DenseArray& mask, double threshold = 0.5);

}  // namespace axtrack
