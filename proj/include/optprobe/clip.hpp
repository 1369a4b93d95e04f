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

#include "optprobe/param_vector.hpp"

namespace optprobe {

/// Coordinate-wise percentile clipping policy.
struct ClipSpec {
  bool enabled = false;
  /// Fraction of coordinates defining the threshold rank, in (0, 1].
  double fraction = 0.1;
  enum class Target { gradient, update };
  /// What gets clipped: the incoming gradient (before the first-moment
  /// update) or the outgoing candidate update.
  Target target = Target::gradient;

  static ClipSpec off() { return {}; }
  static ClipSpec grad(double fraction) {
    return {true, fraction, Target::gradient};
  }
  static ClipSpec update(double fraction) {
    return {true, fraction, Target::update};
  }
};

struct ClipResult {
  ParamVector clipped;
  double tau = 0.0;
  /// Number of coordinates strictly above tau in magnitude.
  std::size_t clipped_count = 0;
};

/// Threshold tau: the m-th largest coordinate magnitude of g, where
/// m = ceil(fraction * dim).  The zero vector yields tau = 0.
double threshold(const ParamVector& g, double fraction);

/// Magnitude cap at tau with sign preservation:
/// out_i = sign(g_i) * min(|g_i|, tau).  Coordinates exactly at tau are left
/// untouched, which makes the map idempotent bit for bit.
ClipResult clip_coordinates(const ParamVector& g, double tau);

/// threshold + clip_coordinates under a spec; disabled spec passes g through
/// with tau = abs_max(g) and zero count.
ClipResult clip(const ParamVector& g, const ClipSpec& spec);

}  // namespace optprobe
