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

#include "optprobe/clip.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "optprobe/errors.hpp"
#include "optprobe/kernels.hpp"

namespace optprobe {

double threshold(const ParamVector& g, double fraction) {
  if (g.size() == 0) throw contract_error("threshold: empty vector");
  if (!(fraction > 0.0) || fraction > 1.0)
    throw contract_error("threshold: fraction must lie in (0, 1]");
  const std::size_t d = g.size();
  std::size_t m = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(d)));
  m = std::min(std::max<std::size_t>(m, 1), d);

  std::vector<double> mag(d);
  for (std::size_t i = 0; i < d; ++i) mag[i] = std::fabs(g[i]);
  std::nth_element(mag.begin(), mag.begin() + (m - 1), mag.end(),
                   std::greater<double>());
  return mag[m - 1];
}

ClipResult clip_coordinates(const ParamVector& g, double tau) {
  if (!(tau >= 0.0)) throw contract_error("clip: tau must be non-negative");
  ClipResult res;
  res.tau = tau;
  res.clipped = ParamVector::zeros(g.size());
  res.clipped_count =
      kern::ops().clip_apply(g.data(), tau, res.clipped.data(), g.size());
  return res;
}

ClipResult clip(const ParamVector& g, const ClipSpec& spec) {
  if (!spec.enabled) {
    ClipResult res;
    res.clipped = g;
    res.tau = abs_max(g);
    res.clipped_count = 0;
    return res;
  }
  return clip_coordinates(g, threshold(g, spec.fraction));
}

}  // namespace optprobe
