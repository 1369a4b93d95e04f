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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace optprobe {

/// Violated precondition or dimension mismatch at a library boundary.
class contract_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite value where a finite one is required (overflow, divergence).
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what, std::size_t step = npos)
      : std::runtime_error(what), step_(step) {}

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  /// Step index at which the failure occurred, or npos if not applicable.
  std::size_t step() const { return step_; }

 private:
  std::size_t step_ = npos;
};

/// Requested capability the target object does not provide.
class unsupported_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration; message carries the offending field path.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace optprobe
