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

#ifndef ASSIM_CONFIG_HPP_
#define ASSIM_CONFIG_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "assim/manifold.hpp"

namespace assim {

struct ConfigEntry {
  std::string value;
  int line = 0;  // 0 for values set outside a file (command-line overrides)
};

/// Flat `key = value` configuration with dotted keys.
///
/// Blank lines and lines starting with '#' are ignored; a '#' preceded by
/// whitespace starts a trailing comment. Numbers may carry a `pi` factor
/// ("pi", "2pi", "0.5*pi"). Lists are comma separated; integer lists also
/// accept ranges "lo:hi" and "lo:step:hi" (inclusive).
class Config {
 public:
  static Config parse(std::istream& in);
  /// Throws ConfigError when the file cannot be read.
  static Config load(const std::string& path);

  void set(const std::string& key, std::string value);
  /// Applies a command-line override "key=value".
  void apply_assignment(const std::string& assignment);

  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  const std::map<std::string, ConfigEntry>& entries() const { return entries_; }
  int line_of(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_real(const std::string& key, double fallback) const;
  long long get_integer(const std::string& key, long long fallback) const;
  std::uint64_t get_unsigned(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_reals(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<int> get_integers(const std::string& key, const std::vector<int>& fallback) const;
  /// Exactly two reals "lo, hi".
  Range get_range(const std::string& key, const Range& fallback) const;

  /// Throws ConfigError at the first key (in file order) not in `known`.
  void require_known(const std::vector<std::string>& known) const;

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;
  std::map<std::string, ConfigEntry> entries_;
};

/// Parses one real with an optional pi factor; throws std::invalid_argument.
double parse_real(const std::string& text);

}  // namespace assim

#endif  // ASSIM_CONFIG_HPP_
