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

#include "optprobe/objective.hpp"

#include <cmath>

#include "optprobe/errors.hpp"

namespace optprobe {
namespace {

void require_dim(const Objective& f, const ParamVector& x, const char* what) {
  if (x.size() != f.dim())
    throw contract_error(std::string(what) + ": dimension mismatch for " +
                         f.name());
}

}  // namespace

ParamVector Objective::hvp(const ParamVector&, const ParamVector&) const {
  throw unsupported_error("objective " + name() +
                          " has no closed-form Hessian-vector product");
}

double central_difference_step(const ParamVector& x, const ParamVector& v) {
  const double vn = norm2(v);
  if (vn == 0.0)
    throw contract_error("central difference direction must be nonzero");
  return 1e-5 * (1.0 + norm2(x)) / vn;
}

double value(const Objective& f, const ParamVector& x) {
  require_dim(f, x, "value");
  const double y = f.value(x);
  if (!std::isfinite(y)) throw numeric_error("non-finite objective value");
  return y;
}

ParamVector gradient(const Objective& f, const ParamVector& x) {
  require_dim(f, x, "gradient");
  ParamVector g = f.gradient(x);
  if (g.size() != f.dim())
    throw contract_error("gradient: objective returned wrong dimension");
  g.check_finite("gradient");
  return g;
}

ParamVector hvp(const Objective& f, const ParamVector& x, const ParamVector& v,
                const HvpMethod& method) {
  require_dim(f, x, "hvp");
  require_dim(f, v, "hvp");
  if (method.mode == HvpMethod::Mode::analytic) {
    if (!f.has_analytic_hvp())
      throw unsupported_error("objective " + f.name() +
                              " has no closed-form Hessian-vector product");
    ParamVector r = f.hvp(x, v);
    r.check_finite("hvp");
    return r;
  }
  double h = method.step.value_or(0.0);
  if (method.step.has_value()) {
    if (!(h > 0.0)) throw contract_error("hvp: step must be positive");
  } else {
    h = central_difference_step(x, v);
  }
  const ParamVector xp = axpby(1.0, x, h, v);
  const ParamVector xm = axpby(1.0, x, -h, v);
  ParamVector r = axpby(1.0 / (2.0 * h), f.gradient(xp), -1.0 / (2.0 * h),
                        f.gradient(xm));
  r.check_finite("hvp");
  return r;
}

HvpMethod preferred_hvp(const Objective& f) {
  return f.has_analytic_hvp() ? HvpMethod::analytic() : HvpMethod::central();
}

}  // namespace optprobe
