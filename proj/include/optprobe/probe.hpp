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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "optprobe/objective.hpp"
#include "optprobe/problems.hpp"

namespace optprobe {

/// 60 logarithmically spaced step sizes spanning [1e-6, 10].
std::vector<double> default_eta_grid();

/// Powers of ten from 10^min_exp to 10^max_exp inclusive.
std::vector<double> decade_edges(int min_exp, int max_exp);

struct ProbeSpec {
  /// Unset means: analytic Hessian products when the objective has them,
  /// central differences otherwise.
  std::optional<HvpMethod> hvp_method;
  /// Displacement used to re-measure sharpness at x + shift*v when the value
  /// at x comes out negative.
  double robust_shift = 0.01;
  /// Step-size grid for landscape scans; strictly increasing, positive.
  std::vector<double> grid = default_eta_grid();
  /// Measure along u/|u|_2 (the reported convention) or along raw u.
  bool normalize = true;
  /// Magnitude bin edges for update-coordinate histograms.
  std::vector<double> histogram_edges = decade_edges(-12, 2);
};

struct SharpnessResult {
  /// Effective value: raw, or the displaced re-measurement when raw < 0.
  double value = 0.0;
  double raw = 0.0;
  bool robust_used = false;
};

/// Curvature v' H(x) v of f along the update direction.
SharpnessResult directional_sharpness(const Objective& f, const ParamVector& x,
                                      const ParamVector& u,
                                      const ProbeSpec& spec = {});

/// Alignment grad(x) . v of the gradient with the update direction.
double gradient_correlation(const Objective& f, const ParamVector& x,
                            const ParamVector& u, bool normalize = true);

struct LandscapePoint {
  double eta = 0.0;
  double loss = 0.0;
};

/// f(x - eta * u/|u|) over the grid.  The direction is always normalized so
/// step sizes are comparable across optimizers.  Non-finite losses are
/// recorded as +infinity.  The unperturbed loss f(x) is not part of the scan;
/// it is reported separately as the probe baseline.
std::vector<LandscapePoint> landscape_scan(const Objective& f, const ParamVector& x,
                                           const ParamVector& u,
                                           const ProbeSpec& spec = {});

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t count = 0;
};

/// Magnitude histogram of coordinates.  Bin k covers [edges[k-1], edges[k]);
/// an explicit underflow bin [0, edges[0]) catches zeros and an overflow bin
/// [edges.back(), inf) the rest, so counts always sum to the dimension.
std::vector<HistogramBin> coordinate_histogram(const ParamVector& g,
                                               const std::vector<double>& edges);

struct DirectionProbe {
  std::string algorithm;
  SharpnessResult sharpness;
  double correlation = 0.0;
  std::vector<LandscapePoint> landscape;
  /// Magnitude histogram of the raw (pre-normalization) direction.
  std::vector<HistogramBin> histogram;
  /// sharpness.value relative to the baseline direction (1.0 for the baseline).
  double ratio_to_baseline = 0.0;
};

struct ProbeReport {
  std::size_t step = 0;
  /// f(x) at the probed point; anchor for every landscape in this report.
  double baseline_loss = 0.0;
  /// Label whose sharpness defines ratio_to_baseline ("sgd" when present).
  std::string baseline_algorithm;
  std::vector<DirectionProbe> directions;
};

/// Probes several labeled candidate directions at one point.  The objective
/// is only ever evaluated, never stepped, so probing has no side effects.
ProbeReport probe_directions(
    const Objective& f, const ParamVector& x,
    const std::vector<std::pair<std::string, ParamVector>>& directions,
    const ProbeSpec& spec = {}, std::size_t step = 0);

struct LemmaStep {
  std::size_t step = 0;
  double grad_norm = 0.0;
  double tau = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double eta = 0.0;
  /// f after the clipped step.
  double lhs = 0.0;
  /// Guaranteed decrease bound for the clipped step.
  double rhs = 0.0;
  double clipped_sharpness = 0.0;
  double sharpness_bound = 0.0;
  bool hypotheses_ok = false;
  bool sharpness_ok = false;
  bool conclusion_ok = false;
  /// Plain gradient descent at step size 1/L on its own trajectory, for
  /// contrast: realized decrease and the classical |grad|^2/(2L) bound.
  double gd_decrement = 0.0;
  double gd_bound = 0.0;
};

struct LemmaReport {
  double eps = 0.0;
  double l_bad = 0.0;
  double ell_good = 0.0;
  double clip_fraction = 0.0;
  std::vector<LemmaStep> steps;

  bool all_conclusions_ok() const;
  bool all_sharpness_ok() const;
};

/// Runs clipped gradient descent with the measured-constant step size
/// eta_t = 1 / ((2 sqrt(eps) L + ell) C2) and checks the per-step decrease
/// guarantee
///   f(x_{t+1}) <= f(x_t) - C1^2 / ((4 sqrt(eps) L + 2 ell) C2) |grad f|^2
/// with C1 = |clipped|/|grad| and C2 = sqrt(d) tau / |clipped| measured at
/// each step.  Requires clip_fraction > eps.
LemmaReport verify_descent_lemma(const TheoremInstance& f, const ParamVector& x0,
                                 std::size_t steps, double clip_fraction);

}  // namespace optprobe
