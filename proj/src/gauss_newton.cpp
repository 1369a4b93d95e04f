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

#include "optprobe/gauss_newton.hpp"

#include <cmath>
#include <cstring>

#include "optprobe/errors.hpp"
#include "optprobe/kernels.hpp"
#include "optprobe/rng.hpp"

namespace optprobe {
namespace {

constexpr std::uint64_t kPowerIterSeed = 0x9e3779b97f4a7c15ULL;
constexpr double kPowerIterTol = 1e-8;
constexpr int kPowerIterMax = 10000;

/// Largest eigenvalue of the symmetric PSD matrix K (n x n, row-major).
double dominant_eigenvalue(const std::vector<double>& K, std::size_t n) {
  Rng rng(kPowerIterSeed);
  std::vector<double> v(n);
  for (double& e : v) e = rng.gaussian();
  double vn = std::sqrt(kern::ops().sum_sq(v.data(), n));
  for (double& e : v) e /= vn;

  std::vector<double> w(n);
  double lambda = 0.0;
  for (int iter = 0; iter < kPowerIterMax; ++iter) {
    for (std::size_t i = 0; i < n; ++i)
      w[i] = kern::ops().dot(K.data() + i * n, v.data(), n);
    const double next = kern::ops().dot(v.data(), w.data(), n);
    const double wn = std::sqrt(kern::ops().sum_sq(w.data(), n));
    if (wn == 0.0) return 0.0;  // start vector annihilated: zero matrix
    const bool done = std::fabs(next - lambda) <= kPowerIterTol * std::max(1.0, std::fabs(next));
    lambda = next;
    if (done && iter > 0) break;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
  }
  return lambda;
}

double spectral_norm_of(const double* data, std::size_t p, std::size_t s) {
  // Gram trick: G^T G is s x s, far smaller than p x p, same top eigenvalue.
  std::vector<double> gram(s * s);
  for (std::size_t a = 0; a < s; ++a)
    for (std::size_t b = a; b < s; ++b) {
      const double k = kern::ops().dot(data + a * p, data + b * p, p);
      gram[a * s + b] = k;
      gram[b * s + a] = k;
    }
  return dominant_eigenvalue(gram, s) / static_cast<double>(s);
}

}  // namespace

double loss_hessian_sqrt_coeff(double z0, double z1) {
  const double m = std::max(z0, z1);
  const double num = std::exp((z0 + z1) / 2.0 - m);
  const double den = std::exp(z0 - m) + std::exp(z1 - m);
  return num / den;
}

GnColumns gn_columns(const MlpClassifier& model, const ParamVector& theta,
                     std::span<const std::size_t> batch) {
  if (batch.empty()) throw contract_error("gauss-newton: empty batch");
  if (theta.size() != model.dim())
    throw contract_error("gauss-newton: theta dimension mismatch");
  for (std::size_t i : batch)
    if (i >= model.sample_count())
      throw contract_error("gauss-newton: sample index out of range");

  GnColumns g;
  g.p = model.dim();
  g.batch.assign(batch.begin(), batch.end());
  g.data.resize(g.p * batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto z = model.logits(theta, batch[j]);
    const double c = loss_hessian_sqrt_coeff(z[0], z[1]);
    const ParamVector col = model.logit_vjp(theta, batch[j], -c, c);
    std::memcpy(g.col(j), col.data(), g.p * sizeof(double));
  }
  return g;
}

double spectral_norm(const GnColumns& g) {
  if (g.cols() == 0) throw contract_error("gauss-newton: empty column set");
  return spectral_norm_of(g.data.data(), g.p, g.cols());
}

RemovalReport coordinate_removal(const GnColumns& g, double multiplier) {
  if (g.cols() == 0) throw contract_error("gauss-newton: empty column set");
  if (!(multiplier > 0.0))
    throw contract_error("gauss-newton: multiplier must be positive");

  const std::size_t p = g.p;
  const std::size_t s = g.cols();
  std::vector<double> row_norm(p, 0.0);
  for (std::size_t j = 0; j < s; ++j) {
    const double* col = g.col(j);
    for (std::size_t i = 0; i < p; ++i) row_norm[i] += col[i] * col[i];
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    row_norm[i] = std::sqrt(row_norm[i]);
    mean += row_norm[i];
  }
  mean /= static_cast<double>(p);

  const double cutoff = multiplier * mean;
  std::vector<std::size_t> keep;
  keep.reserve(p);
  for (std::size_t i = 0; i < p; ++i)
    if (!(row_norm[i] >= cutoff)) keep.push_back(i);
  if (keep.empty())
    throw numeric_error("gauss-newton: removal rule dropped every coordinate");

  RemovalReport rep;
  rep.p = p;
  rep.multiplier = multiplier;
  rep.removed = p - keep.size();
  rep.removed_fraction = static_cast<double>(rep.removed) / static_cast<double>(p);
  rep.l_full = spectral_norm(g);

  std::vector<double> reduced(keep.size() * s);
  for (std::size_t j = 0; j < s; ++j) {
    const double* col = g.col(j);
    double* rcol = reduced.data() + j * keep.size();
    for (std::size_t i = 0; i < keep.size(); ++i) rcol[i] = col[keep[i]];
  }
  rep.l_reduced = spectral_norm_of(reduced.data(), keep.size(), s);
  return rep;
}

}  // namespace optprobe
