// Copyright 2026 The AutoOdom Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <charconv>
#include <cmath>

#include "autoodom/cli.hpp"
#include "autoodom/io.hpp"

namespace autoodom {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
T parse_as(const std::string& key, const std::string& text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("invalid value for '" + key + "': '" + text + "'");
  }
  return value;
}

}  // namespace

RunConfig::RunConfig(std::set<std::string> allowed_keys)
    : allowed_(std::move(allowed_keys)) {}

void RunConfig::load_file(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw UsageError("config file not found: " + path.string());
  }
  parse_text(read_file(path), path.string());
}

void RunConfig::parse_text(std::string_view text, std::string_view origin) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(std::string(origin) + ":" + std::to_string(line_no) +
                       ": expected 'key = value'");
    }
    set(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!allowed_.count(key)) throw UsageError("unknown configuration key '" + key + "'");
  values_[key] = value;
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string RunConfig::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("missing required setting '" + key + "'");
  return it->second;
}

std::string RunConfig::get_string(const std::string& key,
                                  const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

int RunConfig::get_int(const std::string& key, int fallback) const {
  return has(key) ? parse_as<int>(key, values_.at(key)) : fallback;
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? parse_as<std::uint64_t>(key, values_.at(key)) : fallback;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const double v = parse_as<double>(key, values_.at(key));
  if (!std::isfinite(v)) throw UsageError("'" + key + "' must be finite");
  return v;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = values_.at(key);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw UsageError("invalid boolean for '" + key + "': '" + v + "'");
}

std::vector<int> RunConfig::get_int_list(const std::string& key,
                                         const std::vector<int>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<int> out;
  std::string_view text = values_.at(key);
  while (!text.empty()) {
    const std::size_t comma = text.find(',');
    out.push_back(parse_as<int>(key, std::string(trim(text.substr(0, comma)))));
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return out;
}

std::filesystem::path RunConfig::input_path(const std::string& key) const {
  const std::filesystem::path p = get_string(key);
  if (!std::filesystem::exists(p)) {
    throw UsageError("'" + key + "' path does not exist: " + p.string());
  }
  return p;
}

std::filesystem::path RunConfig::output_path(const std::string& key) const {
  const std::filesystem::path p = get_string(key);
  const auto parent = p.has_parent_path() ? p.parent_path() : std::filesystem::path(".");
  if (!std::filesystem::is_directory(parent)) {
    throw UsageError("'" + key + "' parent directory does not exist: " + parent.string());
  }
  return p;
}

}  // namespace autoodom
