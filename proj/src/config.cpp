// Copyright 2026 The assim Authors
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

#include "assim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "assim/error.hpp"

namespace assim {
namespace {

std::string trim(const std::string& s) {
  auto first = std::find_if_not(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
  auto last = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) { return std::isspace(c); });
  if (first >= last.base()) return {};
  return std::string(first, last.base());
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

bool valid_key(const std::string& key) {
  if (key.empty() || key.front() == '.' || key.back() == '.') return false;
  return std::all_of(key.begin(), key.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '.';
  });
}

long long parse_integer(const std::string& text) {
  long long v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw std::invalid_argument("expected an integer, got '" + text + "'");
  }
  return v;
}

}  // namespace

double parse_real(const std::string& raw) {
  std::string text = trim(raw);
  double factor = 1.0;
  if (text.size() >= 2 && text.compare(text.size() - 2, 2, "pi") == 0) {
    factor = std::numbers::pi;
    text.resize(text.size() - 2);
    if (!text.empty() && text.back() == '*') text.pop_back();
    text = trim(text);
    if (text.empty() || text == "+") return factor;
    if (text == "-") return -factor;
  }
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty() || !std::isfinite(v)) {
    throw std::invalid_argument("expected a number, got '" + trim(raw) + "'");
  }
  return v * factor;
}

Config Config::parse(std::istream& in) {
  Config cfg;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    for (std::size_t i = 1; i < text.size(); ++i) {
      if (text[i] == '#' && std::isspace(static_cast<unsigned char>(text[i - 1]))) {
        text = trim(text.substr(0, i));
        break;
      }
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + text + "'", line);
    const std::string key = trim(text.substr(0, eq));
    if (!valid_key(key)) throw ConfigError("invalid key '" + key + "'", line);
    const std::string value = trim(text.substr(eq + 1));
    if (value.empty()) throw ConfigError("key '" + key + "' has no value", line);
    auto [it, inserted] = cfg.entries_.emplace(key, ConfigEntry{value, line});
    if (!inserted) {
      throw ConfigError("duplicate key '" + key + "' (first set on line " +
                            std::to_string(it->second.line) + ")",
                        line);
    }
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in);
}

void Config::set(const std::string& key, std::string value) {
  if (!valid_key(key)) throw ConfigError("invalid key '" + key + "'");
  entries_[key] = ConfigEntry{trim(value), 0};
}

void Config::apply_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string value = trim(assignment.substr(eq + 1));
  if (value.empty()) throw ConfigError("override '" + assignment + "' has no value");
  set(trim(assignment.substr(0, eq)), value);
}

int Config::line_of(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.line;
}

void Config::fail(const std::string& key, const std::string& message) const {
  throw ConfigError("key '" + key + "': " + message, line_of(key));
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second.value;
}

double Config::get_real(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    return parse_real(it->second.value);
  } catch (const std::invalid_argument& e) {
    fail(key, e.what());
  }
}

long long Config::get_integer(const std::string& key, long long fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    return parse_integer(it->second.value);
  } catch (const std::invalid_argument& e) {
    fail(key, e.what());
  }
}

std::uint64_t Config::get_unsigned(const std::string& key, std::uint64_t fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& text = it->second.value;
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) fail(key, "expected a nonnegative integer, got '" + text + "'");
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second.value;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(key, "expected true or false, got '" + v + "'");
}

std::vector<double> Config::get_reals(const std::string& key,
                                      const std::vector<double>& fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<double> out;
  try {
    for (const auto& part : split(it->second.value, ',')) out.push_back(parse_real(part));
  } catch (const std::invalid_argument& e) {
    fail(key, e.what());
  }
  return out;
}

std::vector<int> Config::get_integers(const std::string& key,
                                      const std::vector<int>& fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<int> out;
  try {
    for (const auto& part : split(it->second.value, ',')) {
      const auto fields = split(part, ':');
      if (fields.size() == 1) {
        out.push_back(static_cast<int>(parse_integer(fields[0])));
        continue;
      }
      if (fields.size() > 3) throw std::invalid_argument("malformed range '" + part + "'");
      const long long lo = parse_integer(fields.front());
      const long long hi = parse_integer(fields.back());
      const long long step = fields.size() == 3 ? parse_integer(fields[1]) : 1;
      if (step <= 0 || hi < lo) throw std::invalid_argument("empty range '" + part + "'");
      for (long long v = lo; v <= hi; v += step) out.push_back(static_cast<int>(v));
    }
  } catch (const std::invalid_argument& e) {
    fail(key, e.what());
  }
  return out;
}

Range Config::get_range(const std::string& key, const Range& fallback) const {
  if (!contains(key)) return fallback;
  const auto values = get_reals(key, {});
  if (values.size() != 2) fail(key, "expected two values 'lo, hi'");
  Range r{values[0], values[1]};
  if (!r.well_ordered()) fail(key, "range has lo > hi");
  return r;
}

void Config::require_known(const std::vector<std::string>& known) const {
  std::vector<std::pair<int, std::string>> unknown;
  for (const auto& [key, entry] : entries_) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      unknown.emplace_back(entry.line, key);
    }
  }
  if (unknown.empty()) return;
  std::sort(unknown.begin(), unknown.end());
  throw ConfigError("unknown key '" + unknown.front().second + "'", unknown.front().first);
}

}  // namespace assim
