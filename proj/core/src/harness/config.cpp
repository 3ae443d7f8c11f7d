// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "axtrack/harness/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "axtrack/error.hpp"

namespace axtrack {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    throw ConfigError(fmt::format("invalid value '{}' for {}", value, key));
  }
  return out;
}

}  // namespace

std::string to_string(ScaleMode mode) { return mode == ScaleMode::kOne ? "one" : "inv_sqrt_d"; }

void ModelConfig::validate() const {
  const auto positive = [](std::size_t v, const char* name) {
    if (v < 1) throw ConfigError(fmt::format("{} must be at least 1", name));
  };
  positive(video_len, "video_len");
  positive(height, "height");
  positive(width, "width");
  positive(channels, "channels");
  positive(queries, "queries");
  positive(classes, "classes");
  positive(heads, "heads");
  positive(k_sample, "k_sample");
  if (clip_len < 2) throw ConfigError(fmt::format("clip_len must be at least 2, got {}", clip_len));
  if (channels % heads != 0) {
    throw ConfigError(fmt::format("heads ({}) must divide channels ({})", heads, channels));
  }
  if (atrous_rates[0] < 1 || atrous_rates[1] <= atrous_rates[0] || atrous_rates[2] <= atrous_rates[1]) {
    throw ConfigError(fmt::format("atrous_rates must be increasing positive integers, got {},{},{}",
                                  atrous_rates[0], atrous_rates[1], atrous_rates[2]));
  }
}

double ModelConfig::attention_scale() const {
  return scale_mode == ScaleMode::kOne ? 1.0 : 1.0 / std::sqrt(static_cast<double>(channels));
}

void ModelConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  const auto size = [&] { return parse_number<std::size_t>(key, value); };
  if (key == "video_len") {
    video_len = size();
  } else if (key == "clip_len") {
    clip_len = size();
  } else if (key == "height") {
    height = size();
  } else if (key == "width") {
    width = size();
  } else if (key == "channels") {
    channels = size();
  } else if (key == "queries") {
    queries = size();
  } else if (key == "classes") {
    classes = size();
  } else if (key == "n_within") {
    n_within = size();
  } else if (key == "n_cross") {
    n_cross = size();
  } else if (key == "heads") {
    heads = size();
  } else if (key == "k_sample") {
    k_sample = size();
  } else if (key == "objects") {
    objects = size();
  } else if (key == "decoder_layers") {
    decoder_layers = size();
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "scale_mode") {
    if (value == "inv_sqrt_d") {
      scale_mode = ScaleMode::kInvSqrtD;
    } else if (value == "one") {
      scale_mode = ScaleMode::kOne;
    } else {
      throw ConfigError(fmt::format("scale_mode must be inv_sqrt_d or one, got '{}'", value));
    }
  } else if (key == "atrous_rates") {
    std::array<int, 3> r{};
    std::size_t i = 0;
    std::string_view rest = value;
    while (true) {
      const auto comma = rest.find(',');
      if (i == 3) throw ConfigError(fmt::format("atrous_rates needs three values, got '{}'", value));
      r[i++] = parse_number<int>(key, trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (i != 3) throw ConfigError(fmt::format("atrous_rates needs three values, got '{}'", value));
    atrous_rates = r;
  } else {
    throw ConfigError(fmt::format("unknown config key '{}'", key));
  }
}

ModelConfig ModelConfig::parse(std::string_view text) {
  ModelConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (!seen.emplace(key).second) throw ConfigError(fmt::format("line {}: duplicate key '{}'", line_no, key));
    try {
      cfg.set(key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  cfg.validate();
  return cfg;
}

ModelConfig ModelConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read config {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ModelConfig::serialize() const {
  std::string out;
  const auto line = [&out](std::string_view k, const auto& v) { out += fmt::format("{} = {}\n", k, v); };
  line("video_len", video_len);
  line("clip_len", clip_len);
  line("height", height);
  line("width", width);
  line("channels", channels);
  line("queries", queries);
  line("classes", classes);
  line("n_within", n_within);
  line("n_cross", n_cross);
  line("heads", heads);
  line("k_sample", k_sample);
  line("atrous_rates", fmt::format("{},{},{}", atrous_rates[0], atrous_rates[1], atrous_rates[2]));
  line("scale_mode", to_string(scale_mode));
  line("seed", seed);
  line("objects", objects);
  line("decoder_layers", decoder_layers);
  return out;
}

}  // namespace axtrack
