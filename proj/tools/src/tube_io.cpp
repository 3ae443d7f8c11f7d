// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "axtrack/cli/tube_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "axtrack/cli/report.hpp"
#include "axtrack/error.hpp"
#include "axtrack/harness/pgm.hpp"

namespace axtrack::cli {
namespace fs = std::filesystem;
namespace {

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
}

void write_masks(const fs::path& dir, const DenseArray& masks) {
  const std::size_t L = masks.extent(0), H = masks.extent(1), W = masks.extent(2);
  for (std::size_t t = 0; t < L; ++t) {
    DenseArray frame({H, W});
    std::copy_n(masks.data().begin() + static_cast<std::ptrdiff_t>(t * H * W), H * W, frame.data().begin());
    write_pgm(dir / fmt::format("t{:04}.pgm", t), mask_image(frame));
  }
}

std::string tube_name(std::size_t i) { return fmt::format("tube_{:04}", i); }

struct Meta {
  int class_id = 0;
  std::size_t track_id = 0;
  std::size_t span = 0;
  std::optional<std::vector<double>> class_probs;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename N>
N parse_number(const std::string& s, const fs::path& where) {
  N v{};
  const char* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw IoError(fmt::format("{}: bad number '{}'", where.string(), s));
  return v;
}

Meta read_meta(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read {}", path.string()));
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError(fmt::format("{}: expected key = value", path.string()));
    kv[trim(std::string_view(line).substr(0, eq))] = trim(std::string_view(line).substr(eq + 1));
  }
  for (const char* key : {"class_id", "track_id", "span"})
    if (!kv.count(key)) throw IoError(fmt::format("{}: missing {}", path.string(), key));
  Meta m;
  m.class_id = parse_number<int>(kv["class_id"], path);
  m.track_id = parse_number<std::size_t>(kv["track_id"], path);
  m.span = parse_number<std::size_t>(kv["span"], path);
  if (m.class_id < 0) throw IoError(fmt::format("{}: negative class_id", path.string()));
  if (auto it = kv.find("class_probs"); it != kv.end()) {
    std::vector<double> probs;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) probs.push_back(parse_number<double>(trim(item), path));
    m.class_probs = std::move(probs);
  }
  return m;
}

DenseArray read_masks(const fs::path& dir, std::size_t span) {
  if (span == 0) throw IoError(fmt::format("{}: span must be positive", dir.string()));
  DenseArray masks;
  std::size_t H = 0, W = 0;
  for (std::size_t t = 0; t < span; ++t) {
    const PgmImage img = read_pgm(dir / fmt::format("t{:04}.pgm", t));
    if (t == 0) {
      H = img.height;
      W = img.width;
      masks = DenseArray({span, H, W});
    } else if (img.height != H || img.width != W) {
      throw DimensionError(fmt::format("{}: frame {} is {}x{}, expected {}x{}", dir.string(), t, img.height,
                                       img.width, H, W));
    }
    for (std::size_t i = 0; i < H * W; ++i) masks.data()[t * H * W + i] = img.pixels[i] >= 128 ? 1.0 : 0.0;
  }
  return masks;
}

std::vector<fs::path> tube_dirs(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IoError(fmt::format("{} is not a directory", root.string()));
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root, ec)) {
    if (entry.is_directory() && entry.path().filename().string().rfind("tube_", 0) == 0) dirs.push_back(entry.path());
  }
  if (ec) throw IoError(fmt::format("cannot list {}: {}", root.string(), ec.message()));
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

}  // namespace

void write_tubes(const fs::path& root, const std::vector<Tube>& tubes) {
  for (std::size_t i = 0; i < tubes.size(); ++i) {
    const Tube& tube = tubes[i];
    const fs::path dir = root / tube_name(i);
    make_dir(dir);
    write_masks(dir, tube.masks);
    std::vector<std::string> probs;
    for (double p : tube.class_probs) probs.push_back(format_double(p));
    write_text(dir / "meta", fmt::format("class_id = {}\ntrack_id = {}\nspan = {}\nclass_probs = {}\n",
                                         predicted_class(tube), tube.track_id, tube.span(),
                                         fmt::join(probs, ",")));
  }
}

void write_ground_truth(const fs::path& root, const GroundTruthSet& gt) {
  for (std::size_t i = 0; i < gt.tubes.size(); ++i) {
    const GroundTruthTube& tube = gt.tubes[i];
    const fs::path dir = root / tube_name(i);
    make_dir(dir);
    write_masks(dir, tube.masks);
    write_text(dir / "meta", fmt::format("class_id = {}\ntrack_id = {}\nspan = {}\n", tube.class_id, tube.track_id,
                                         tube.masks.extent(0)));
  }
}

std::vector<Tube> read_tubes(const fs::path& root) {
  std::vector<Tube> tubes;
  for (const fs::path& dir : tube_dirs(root)) {
    const Meta m = read_meta(dir / "meta");
    Tube t;
    t.masks = read_masks(dir, m.span);
    t.track_id = m.track_id;
    if (m.class_probs) {
      t.class_probs = *m.class_probs;
    } else {
      t.class_probs.assign(static_cast<std::size_t>(m.class_id) + 1, 0.0);
      t.class_probs.back() = 1.0;
    }
    if (t.class_probs.empty()) throw IoError(fmt::format("{}: empty class_probs", dir.string()));
    tubes.push_back(std::move(t));
  }
  return tubes;
}

GroundTruthSet read_ground_truth(const fs::path& root) {
  GroundTruthSet gt;
  for (const fs::path& dir : tube_dirs(root)) {
    const Meta m = read_meta(dir / "meta");
    gt.tubes.push_back({read_masks(dir, m.span), m.class_id, m.track_id});
  }
  gt.validate();
  return gt;
}

}  // namespace axtrack::cli
