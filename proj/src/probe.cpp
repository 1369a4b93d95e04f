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

#include "optprobe/probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "optprobe/clip.hpp"
#include "optprobe/errors.hpp"
#include "optprobe/optim.hpp"

namespace optprobe {
namespace {

void validate_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw contract_error("probe: empty step-size grid");
  double prev = 0.0;
  for (double e : grid) {
    if (!(e > prev) || !std::isfinite(e))
      throw contract_error("probe: grid must be positive and strictly increasing");
    prev = e;
  }
}

ParamVector probe_direction(const ParamVector& u, bool normalize) {
  const double n = norm2(u);
  if (n == 0.0) throw contract_error("probe: zero direction");
  return normalize ? scaled(1.0 / n, u) : u;
}

}  // namespace

std::vector<double> default_eta_grid() {
  constexpr int kPoints = 60;
  constexpr double kLo = 1e-6;
  constexpr double kHi = 10.0;
  std::vector<double> grid(kPoints);
  for (int i = 0; i < kPoints; ++i)
    grid[i] = kLo * std::pow(kHi / kLo, static_cast<double>(i) / (kPoints - 1));
  return grid;
}

SharpnessResult directional_sharpness(const Objective& f, const ParamVector& x,
                                      const ParamVector& u, const ProbeSpec& spec) {
  if (!(spec.robust_shift > 0.0))
    throw contract_error("probe: robust_shift must be positive");
  const ParamVector v = probe_direction(u, spec.normalize);
  const HvpMethod method = spec.hvp_method.value_or(preferred_hvp(f));

  SharpnessResult res;
  res.raw = dot(v, hvp(f, x, v, method));
  if (res.raw < 0.0) {
    // Negative curvature along the step direction; re-measure slightly ahead
    // of x, which typically lands back in a positive-curvature region.
    const ParamVector shifted = axpby(1.0, x, spec.robust_shift, v);
    res.value = dot(v, hvp(f, shifted, v, method));
    res.robust_used = true;
  } else {
    res.value = res.raw;
  }
  return res;
}

double gradient_correlation(const Objective& f, const ParamVector& x,
                            const ParamVector& u, bool normalize) {
  const ParamVector v = probe_direction(u, normalize);
  return dot(gradient(f, x), v);
}

std::vector<LandscapePoint> landscape_scan(const Objective& f, const ParamVector& x,
                                           const ParamVector& u,
                                           const ProbeSpec& spec) {
  validate_grid(spec.grid);
  if (x.size() != f.dim()) throw contract_error("landscape: dimension mismatch");
  const double n = norm2(u);
  if (n == 0.0) throw contract_error("landscape: zero direction");
  const ParamVector v = scaled(1.0 / n, u);

  std::vector<LandscapePoint> out;
  out.reserve(spec.grid.size());
  for (double eta : spec.grid) {
    const ParamVector y = axpby(1.0, x, -eta, v);
    const double loss = f.value(y);
    out.push_back({eta, std::isfinite(loss)
                            ? loss
                            : std::numeric_limits<double>::infinity()});
  }
  return out;
}

std::vector<HistogramBin> coordinate_histogram(const ParamVector& g,
                                               const std::vector<double>& edges) {
  if (g.size() == 0) throw contract_error("histogram: empty vector");
  validate_grid(edges);

  std::vector<HistogramBin> bins(edges.size() + 1);
  bins[0] = {0.0, edges[0], 0};
  for (std::size_t k = 1; k < edges.size(); ++k)
    bins[k] = {edges[k - 1], edges[k], 0};
  bins[edges.size()] = {edges.back(), std::numeric_limits<double>::infinity(), 0};

  for (std::size_t i = 0; i < g.size(); ++i) {
    const double a = std::fabs(g[i]);
    const std::size_t k = static_cast<std::size_t>(
        std::upper_bound(edges.begin(), edges.end(), a) - edges.begin());
    ++bins[k].count;
  }
  return bins;
}

std::vector<double> decade_edges(int min_exp, int max_exp) {
  if (min_exp > max_exp) throw contract_error("histogram: bad decade range");
  std::vector<double> edges;
  edges.reserve(static_cast<std::size_t>(max_exp - min_exp) + 1);
  for (int e = min_exp; e <= max_exp; ++e)
    edges.push_back(std::pow(10.0, static_cast<double>(e)));
  return edges;
}

ProbeReport probe_directions(
    const Objective& f, const ParamVector& x,
    const std::vector<std::pair<std::string, ParamVector>>& directions,
    const ProbeSpec& spec, std::size_t step) {
  ProbeReport report;
  report.step = step;
  report.baseline_loss = value(f, x);

  for (const auto& [label, u] : directions) {
    DirectionProbe p;
    p.algorithm = label;
    p.sharpness = directional_sharpness(f, x, u, spec);
    p.correlation = gradient_correlation(f, x, u, spec.normalize);
    p.landscape = landscape_scan(f, x, u, spec);
    p.histogram = coordinate_histogram(u, spec.histogram_edges);
    report.directions.push_back(std::move(p));
  }

  // Ratio table baseline: plain SGD when present, else the first entry.
  std::size_t base = 0;
  for (std::size_t i = 0; i < report.directions.size(); ++i)
    if (report.directions[i].algorithm == "sgd") {
      base = i;
      break;
    }
  if (!report.directions.empty()) {
    report.baseline_algorithm = report.directions[base].algorithm;
    const double denom = report.directions[base].sharpness.value;
    for (std::size_t i = 0; i < report.directions.size(); ++i) {
      DirectionProbe& p = report.directions[i];
      p.ratio_to_baseline = i == base ? 1.0 : p.sharpness.value / denom;
    }
  }
  return report;
}

bool LemmaReport::all_conclusions_ok() const {
  for (const LemmaStep& s : steps)
    if (!s.conclusion_ok) return false;
  return true;
}

bool LemmaReport::all_sharpness_ok() const {
  for (const LemmaStep& s : steps)
    if (!s.sharpness_ok) return false;
  return true;
}

LemmaReport verify_descent_lemma(const TheoremInstance& f, const ParamVector& x0,
                                 std::size_t steps, double clip_fraction) {
  if (!(clip_fraction > f.eps()))
    throw contract_error(
        "descent lemma: clip fraction must exceed the stiff-coordinate "
        "fraction eps");
  if (clip_fraction > 1.0)
    throw contract_error("descent lemma: clip fraction must lie in (eps, 1]");
  if (steps == 0) throw contract_error("descent lemma: need at least one step");
  if (x0.size() != f.dim()) throw contract_error("descent lemma: dimension mismatch");

  const double eps = f.eps();
  const double L = f.l_bad();
  const double ell = f.ell_good();
  const double d = static_cast<double>(f.dim());
  const double curvature_coeff = 2.0 * std::sqrt(eps) * L + ell;

  LemmaReport report;
  report.eps = eps;
  report.l_bad = L;
  report.ell_good = ell;
  report.clip_fraction = clip_fraction;

  ParamVector x = x0;  // clipped trajectory
  ParamVector y = x0;  // plain GD trajectory at 1/L
  for (std::size_t t = 1; t <= steps; ++t) {
    LemmaStep s;
    s.step = t;

    const ParamVector g = gradient(f, x);
    s.grad_norm = norm2(g);
    const double fx = value(f, x);

    if (s.grad_norm == 0.0) {
      // At a stationary point the guarantee degenerates to f <= f.
      s.lhs = fx;
      s.rhs = fx;
      s.hypotheses_ok = true;
      s.sharpness_ok = true;
      s.conclusion_ok = true;
    } else {
      s.tau = threshold(g, clip_fraction);
      const ClipResult cr = clip_coordinates(g, s.tau);
      const double clipped_norm = norm2(cr.clipped);
      if (clipped_norm == 0.0 || s.tau == 0.0) {
        s.hypotheses_ok = false;
        s.sharpness_ok = true;
        s.conclusion_ok = true;
        s.lhs = fx;
        s.rhs = fx;
      } else {
        s.c1 = clipped_norm / s.grad_norm;
        s.c2 = std::sqrt(d) * s.tau / clipped_norm;
        s.eta = 1.0 / (curvature_coeff * s.c2);
        s.hypotheses_ok = s.c1 > 0.0 && std::isfinite(s.c2);

        s.clipped_sharpness =
            dot(cr.clipped, f.hvp(x, cr.clipped)) / (clipped_norm * clipped_norm);
        s.sharpness_bound = s.c2 * curvature_coeff;
        s.sharpness_ok = s.clipped_sharpness <= s.sharpness_bound;

        const ParamVector x_next = apply_update(x, cr.clipped, s.eta);
        s.lhs = value(f, x_next);
        s.rhs = fx - (s.c1 * s.c1 / (2.0 * curvature_coeff * s.c2)) *
                         (s.grad_norm * s.grad_norm);
        s.conclusion_ok = s.lhs <= s.rhs;
        x = x_next;
      }
    }

    const ParamVector gy = gradient(f, y);
    const double gy_sq = norm2_sq(gy);
    s.gd_bound = gy_sq / (2.0 * L);
    if (gy_sq > 0.0) {
      const ParamVector y_next = apply_update(y, gy, 1.0 / L);
      s.gd_decrement = value(f, y) - value(f, y_next);
      y = y_next;
    }

    report.steps.push_back(s);
  }
  return report;
}

}  // namespace optprobe
