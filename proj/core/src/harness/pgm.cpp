// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "axtrack/harness/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "axtrack/error.hpp"

namespace axtrack {

std::string encode_pgm(const PgmImage& img) {
  if (img.pixels.size() != img.width * img.height) throw DimensionError("pgm pixel count does not match its size");
  std::string out = fmt::format("P5\n{} {}\n255\n", img.width, img.height);
  out.append(img.pixels.begin(), img.pixels.end());
  return out;
}

PgmImage decode_pgm(const std::string& bytes) {
  std::size_t pos = 0;
  const auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  const auto number = [&]() -> std::size_t {
    skip_space();
    const std::size_t start = pos;
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos])))
      v = v * 10 + static_cast<std::size_t>(bytes[pos++] - '0');
    if (pos == start) throw IoError("malformed pgm header");
    return v;
  };
  if (bytes.compare(0, 2, "P5") != 0) throw IoError("not a binary pgm (missing P5)");
  pos = 2;
  PgmImage img;
  img.width = number();
  img.height = number();
  const std::size_t maxval = number();
  if (maxval != 255) throw IoError(fmt::format("unsupported pgm maxval {}", maxval));
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw IoError("malformed pgm header");
  }
  ++pos;
  if (bytes.size() - pos != img.width * img.height) {
    throw IoError(fmt::format("pgm has {} pixel bytes, expected {}", bytes.size() - pos, img.width * img.height));
  }
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return img;
}

void write_pgm(const std::filesystem::path& path, const PgmImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
  const std::string bytes = encode_pgm(img);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

PgmImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_pgm(buf.str());
}

PgmImage normalized_image(const DenseArray& map) {
  if (map.rank() != 2) throw DimensionError(fmt::format("heatmap must be H x W, got {}", shape_to_string(map.shape())));
  PgmImage img{map.extent(1), map.extent(0), std::vector<std::uint8_t>(map.size(), 255)};
  const auto [lo, hi] = std::minmax_element(map.data().begin(), map.data().end());
  const double range = *hi - *lo;
  if (range > 0.0) {
    for (std::size_t i = 0; i < map.size(); ++i)
      img.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * (map[i] - *lo) / range));
  }
  return img;
}

PgmImage mask_image(const DenseArray& mask, double threshold) {
  if (mask.rank() != 2) throw DimensionError(fmt::format("mask must be H x W, got {}", shape_to_string(mask.shape())));
  PgmImage img{mask.extent(1), mask.extent(0), std::vector<std::uint8_t>(mask.size(), 0)};
  for (std::size_t i = 0; i < mask.size(); ++i) img.pixels[i] = mask[i] > threshold ? 255 : 0;
  return img;
}

}  // namespace axtrack
