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

#include "optprobe/param_vector.hpp"

#include <cmath>
#include <cstring>

#include "optprobe/errors.hpp"
#include "optprobe/kernels.hpp"

namespace optprobe {
namespace {

void require_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x))
      throw contract_error("ParamVector entries must be finite");
}

void require_same_size(const ParamVector& a, const ParamVector& b) {
  if (a.size() != b.size())
    throw contract_error("vector length mismatch");
}

}  // namespace

ParamVector::ParamVector(std::vector<double> values) : v_(std::move(values)) {
  require_finite(v_);
}

ParamVector::ParamVector(std::initializer_list<double> values) : v_(values) {
  require_finite(v_);
}

ParamVector ParamVector::zeros(std::size_t n) {
  ParamVector out;
  out.v_.assign(n, 0.0);
  return out;
}

ParamVector ParamVector::constant(std::size_t n, double c) {
  ParamVector out;
  out.v_.assign(n, c);
  require_finite(out.v_);
  return out;
}

void ParamVector::check_finite(const char* what) const {
  for (double x : v_)
    if (!std::isfinite(x)) throw numeric_error(std::string("non-finite ") + what);
}

double dot(const ParamVector& a, const ParamVector& b) {
  require_same_size(a, b);
  return kern::ops().dot(a.data(), b.data(), a.size());
}

double norm2(const ParamVector& a) { return std::sqrt(norm2_sq(a)); }

double norm2_sq(const ParamVector& a) {
  return kern::ops().sum_sq(a.data(), a.size());
}

double abs_max(const ParamVector& a) {
  return kern::ops().abs_max(a.data(), a.size());
}

ParamVector axpby(double a, const ParamVector& x, double b, const ParamVector& y) {
  require_same_size(x, y);
  ParamVector out = ParamVector::zeros(x.size());
  kern::ops().axpby(a, x.data(), b, y.data(), out.data(), x.size());
  return out;
}

ParamVector scaled(double a, const ParamVector& x) {
  ParamVector out = ParamVector::zeros(x.size());
  kern::ops().scale(a, x.data(), out.data(), x.size());
  return out;
}

bool bitwise_equal(const ParamVector& a, const ParamVector& b) {
  if (a.size() != b.size()) return false;
  return a.size() == 0 ||
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace optprobe
