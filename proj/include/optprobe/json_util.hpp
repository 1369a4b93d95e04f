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
#include <initializer_list>
#include <string>
#include <vector>

#include "json.hpp"
#include "optprobe/errors.hpp"

// Small helpers for strict JSON schemas.  Every reader takes the dotted field
// path so config_error messages point at the offending field.

namespace optprobe::jsonu {

using nlohmann::json;

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline void require_object(const json& j, const std::string& path) {
  if (!j.is_object())
    throw config_error(path + ": expected an object");
}

/// Rejects keys outside the allowed set; unknown keys are reported by path.
inline void require_keys(const json& j, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  require_object(j, path);
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw config_error(join(path, it.key()) + ": unknown field");
  }
}

inline bool has(const json& j, const char* key) { return j.contains(key); }

inline double get_number(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) throw config_error(join(path, key) + ": missing field");
  const json& v = j.at(key);
  if (!v.is_number()) throw config_error(join(path, key) + ": expected a number");
  return v.get<double>();
}

inline double get_number_or(const json& j, const std::string& path,
                            const char* key, double fallback) {
  return j.contains(key) ? get_number(j, path, key) : fallback;
}

inline std::uint64_t get_uint(const json& j, const std::string& path,
                              const char* key) {
  if (!j.contains(key)) throw config_error(join(path, key) + ": missing field");
  const json& v = j.at(key);
  if (!v.is_number_unsigned())
    throw config_error(join(path, key) + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

inline std::uint64_t get_uint_or(const json& j, const std::string& path,
                                 const char* key, std::uint64_t fallback) {
  return j.contains(key) ? get_uint(j, path, key) : fallback;
}

inline bool get_bool_or(const json& j, const std::string& path, const char* key,
                        bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw config_error(join(path, key) + ": expected a boolean");
  return v.get<bool>();
}

inline std::string get_string(const json& j, const std::string& path,
                              const char* key) {
  if (!j.contains(key)) throw config_error(join(path, key) + ": missing field");
  const json& v = j.at(key);
  if (!v.is_string()) throw config_error(join(path, key) + ": expected a string");
  return v.get<std::string>();
}

inline std::string get_string_or(const json& j, const std::string& path,
                                 const char* key, const std::string& fallback) {
  return j.contains(key) ? get_string(j, path, key) : fallback;
}

inline std::vector<double> get_number_array(const json& j, const std::string& path,
                                            const char* key) {
  if (!j.contains(key)) throw config_error(join(path, key) + ": missing field");
  const json& v = j.at(key);
  if (!v.is_array()) throw config_error(join(path, key) + ": expected an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const json& e : v) {
    if (!e.is_number())
      throw config_error(join(path, key) + ": expected numeric entries");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace optprobe::jsonu
