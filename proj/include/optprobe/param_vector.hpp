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
#include <span>
#include <vector>

namespace optprobe {

/// Dense coordinate vector.  All entries are finite at construction; the
/// length never changes afterwards.  Mutable element access exists for
/// optimizer buffers, which re-establish finiteness through the trajectory
/// loss checks rather than per write.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::vector<double> values);
  ParamVector(std::initializer_list<double> values);

  static ParamVector zeros(std::size_t n);
  static ParamVector constant(std::size_t n, double c);

  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  double operator[](std::size_t i) const { return v_[i]; }
  double& operator[](std::size_t i) { return v_[i]; }

  const double* data() const { return v_.data(); }
  double* data() { return v_.data(); }

  std::span<const double> span() const { return {v_.data(), v_.size()}; }
  std::span<double> span() { return {v_.data(), v_.size()}; }

  const std::vector<double>& values() const { return v_; }

  /// Throws numeric_error if any entry is non-finite.
  void check_finite(const char* what) const;

 private:
  std::vector<double> v_;
};

// Kernel-backed helpers.  Dimension mismatches throw contract_error.
double dot(const ParamVector& a, const ParamVector& b);
double norm2(const ParamVector& a);
double norm2_sq(const ParamVector& a);
double abs_max(const ParamVector& a);
/// a*x + b*y
ParamVector axpby(double a, const ParamVector& x, double b, const ParamVector& y);
ParamVector scaled(double a, const ParamVector& x);
/// Exact bit comparison, including signed zeros.
bool bitwise_equal(const ParamVector& a, const ParamVector& b);

}  // namespace optprobe
