// Copyright 2026 The axtrack Authors
// SPDX-License-Identifier: Apache-2.0

#include "axtrack/cli/report.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "axtrack/error.hpp"

namespace axtrack::cli {
namespace {

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
  out.close();
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
}

}  // namespace

std::string format_double(double v) {
  std::string s = fmt::format("{}", v);
  if (std::isfinite(v) && s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

void Report::put(std::string key, Value v) {
  if (find(key) != nullptr) throw Error(fmt::format("duplicate report key '{}'", key));
  entries_.emplace_back(std::move(key), std::move(v));
}

const Report::Value* Report::find(std::string_view key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return &v;
  return nullptr;
}

std::string Report::text() const {
  std::string out;
  for (const auto& [key, value] : entries_) {
    const std::string v = std::visit(
        [](const auto& x) -> std::string {
          using X = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<X, bool>) {
            return x ? "true" : "false";
          } else if constexpr (std::is_same_v<X, double>) {
            return format_double(x);
          } else if constexpr (std::is_same_v<X, std::string>) {
            return x;
          } else {
            return fmt::format("{}", x);
          }
        },
        value);
    out += fmt::format("{} = {}\n", key, v);
  }
  return out;
}

std::string Report::json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [key, value] : entries_) {
    std::visit([&](const auto& x) { j[key] = x; }, value);
  }
  return j.dump(2) + "\n";
}

void Report::write(const std::filesystem::path& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  write_file(dir / "report.txt", text());
  write_file(dir / "report.json", json());
}

}  // namespace axtrack::cli
