// Copyright 2026 The mmcca Authors
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
#pragma once

#include <map>
#include <string>
#include <vector>

#include "mmcca/linalg.hpp"

namespace mmcca {

/// Flat "key = value" settings. Blank lines and lines starting with '#' are
/// ignored; later assignments win.
class KeyValueConfig {
 public:
  static KeyValueConfig load(const std::string& path);
  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<config>");

  /// "key=value"
  void set_assignment(const std::string& assignment);
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  unsigned long long get_uint(const std::string& key, unsigned long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated list.
  std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const;

 private:
  std::map<std::string, std::string> values_;
};

std::vector<Index> parse_index_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

}  // namespace mmcca
