// Copyright 2026 The Optprobe Authors
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

#include <cstdint>
#include <fstream>
#include <string>
#include <type_traits>
#include <vector>

namespace optprobe {

/// Round-trip-exact decimal rendering (17 significant digits, trailing
/// zeros trimmed by %g).  Infinities print as "inf"/"-inf".
std::string format_double(double v);

/// Minimal CSV emitter: header row fixed at construction, one row() call per
/// record, fields joined with commas and terminated by '\n'.  Writes are
/// deterministic byte for byte for identical inputs.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);
  ~CsvWriter();

  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<std::string>& fields);
  void close();

  static std::string field(double v) { return format_double(v); }
  static std::string field(bool v) { return v ? "1" : "0"; }
  static std::string field(const std::string& v) { return v; }
  static std::string field(const char* v) { return v; }
  template <typename T,
            std::enable_if_t<std::is_integral_v<T> && !std::is_same_v<T, bool>,
                             int> = 0>
  static std::string field(T v) {
    return std::to_string(v);
  }

 private:
  std::ofstream out_;
  std::string path_;
  std::size_t columns_ = 0;
};

}  // namespace optprobe
