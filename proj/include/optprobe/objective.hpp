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

#include <memory>
#include <optional>
#include <string>

#include "optprobe/param_vector.hpp"

namespace optprobe {

/// Twice-differentiable scalar objective over a flat parameter vector.
/// Implementations are pure: same input, same output, no internal state
/// mutation through the const interface.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t dim() const = 0;
  virtual std::string name() const = 0;

  virtual double value(const ParamVector& x) const = 0;
  virtual ParamVector gradient(const ParamVector& x) const = 0;

  /// Exact Hessian-vector product.  Only valid if has_analytic_hvp().
  virtual ParamVector hvp(const ParamVector& x, const ParamVector& v) const;
  virtual bool has_analytic_hvp() const { return false; }
};

/// How Hessian-vector products are formed.
struct HvpMethod {
  enum class Mode { analytic, central_difference };

  Mode mode = Mode::analytic;
  /// Central-difference displacement; unset means the scaled default
  /// 1e-5 * (1 + |x|_2) / |v|_2 computed per call.
  std::optional<double> step;

  static HvpMethod analytic() { return {Mode::analytic, std::nullopt}; }
  static HvpMethod central(std::optional<double> h = std::nullopt) {
    return {Mode::central_difference, h};
  }
};

/// Default central-difference displacement for the pair (x, v).
double central_difference_step(const ParamVector& x, const ParamVector& v);

// Checked evaluation wrappers.  Dimension mismatches throw contract_error;
// non-finite results throw numeric_error.
double value(const Objective& f, const ParamVector& x);
ParamVector gradient(const Objective& f, const ParamVector& x);

/// Hessian-vector product under the chosen method.  Analytic mode on an
/// objective without a closed-form Hessian throws unsupported_error.
ParamVector hvp(const Objective& f, const ParamVector& x, const ParamVector& v,
                const HvpMethod& method = HvpMethod::analytic());

/// Method actually used when the caller has no preference: analytic if the
/// objective provides it, central difference otherwise.
HvpMethod preferred_hvp(const Objective& f);

}  // namespace optprobe
