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

#include "optprobe/param_vector.hpp"
#include "optprobe/problems.hpp"

namespace optprobe {

/// Gauss-Newton factor columns for a batch: column j is
/// d(logits)/d(theta)^T applied to the loss-curvature square root of sample
/// batch[j].  The batch-averaged Gauss-Newton matrix is (1/|S|) G G^T.
struct GnColumns {
  std::size_t p = 0;                 // parameter count (rows)
  std::vector<std::size_t> batch;    // sample indices (columns)
  std::vector<double> data;          // column-major, p x batch.size()

  std::size_t cols() const { return batch.size(); }
  const double* col(std::size_t j) const { return data.data() + j * p; }
  double* col(std::size_t j) { return data.data() + j * p; }
};

/// Square-root coefficient of the two-way softmax cross-entropy Hessian:
/// the Hessian in logit space is c^2 * [[1,-1],[-1,1]] with
/// c = sqrt(e^{z0} e^{z1}) / (e^{z0} + e^{z1}).  c(0,0) = 1/2.
double loss_hessian_sqrt_coeff(double z0, double z1);

GnColumns gn_columns(const MlpClassifier& model, const ParamVector& theta,
                     std::span<const std::size_t> batch);

/// Largest eigenvalue of (1/|S|) G G^T, computed by power iteration on the
/// batch-sized Gram matrix G^T G (same nonzero spectrum).  Deterministic
/// seeded start, 1e-8 relative stagnation tolerance, at most 10000 iterations.
double spectral_norm(const GnColumns& g);

struct RemovalReport {
  double l_full = 0.0;      // spectral norm with every coordinate
  double l_reduced = 0.0;   // after dropping dominant coordinates
  double removed_fraction = 0.0;
  std::size_t removed = 0;
  std::size_t p = 0;
  double multiplier = 0.0;

  double ratio() const { return l_full / l_reduced; }
};

/// Drops every coordinate (row) whose norm is at least multiplier times the
/// mean row norm, then reports the spectral norms before and after.  Throws
/// if the rule removes every coordinate.
RemovalReport coordinate_removal(const GnColumns& g, double multiplier = 4.0);

}  // namespace optprobe
