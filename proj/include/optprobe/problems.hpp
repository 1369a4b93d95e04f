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

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "optprobe/layout.hpp"
#include "optprobe/objective.hpp"

namespace optprobe {

/// f(x) = sum_i a_i x_i^2 with a_i > 0.  Hessian is diag(2a), spectral norm
/// 2 max(a).
class DiagQuadratic : public Objective {
 public:
  explicit DiagQuadratic(std::vector<double> diag);

  std::size_t dim() const override { return diag_.size(); }
  std::string name() const override { return "quadratic"; }
  double value(const ParamVector& x) const override;
  ParamVector gradient(const ParamVector& x) const override;
  ParamVector hvp(const ParamVector& x, const ParamVector& v) const override;
  bool has_analytic_hvp() const override { return true; }

  const std::vector<double>& diag() const { return diag_; }
  double hessian_spectral_norm() const;

 private:
  std::vector<double> diag_;
};

/// Ill-conditioned diagonal quadratic: a small fraction of coordinates carry
/// curvature l_bad, the rest carry ell_good.  The seed fixes a start point
/// whose coordinates have near-unit magnitude and random signs, so the
/// gradient mass sits on the stiff coordinates.
class TheoremInstance : public DiagQuadratic {
 public:
  TheoremInstance(std::size_t dim, double eps, double l_bad, double ell_good,
                  std::uint64_t seed);

  std::string name() const override { return "theorem_instance"; }

  double eps() const { return eps_; }
  double l_bad() const { return l_bad_; }
  double ell_good() const { return ell_good_; }
  /// ceil(eps * dim) stiff coordinates, placed first.
  std::size_t bad_count() const { return bad_count_; }
  std::uint64_t seed() const { return seed_; }
  ParamVector start_point() const;

 private:
  double eps_;
  double l_bad_;
  double ell_good_;
  std::size_t bad_count_;
  std::uint64_t seed_;
};

/// One-hidden-layer tanh network with a two-way softmax head, trained with
/// cross-entropy on two seeded Gaussian clusters.  The objective is the mean
/// loss over the full dataset; gradient and Hessian-vector products are
/// exact.  Flat parameter order: W1 (hidden x input, row-major), b1, W2
/// (2 x hidden, row-major), b2.
class MlpClassifier : public Objective {
 public:
  MlpClassifier(std::size_t input_dim, std::size_t hidden, std::size_t samples,
                double separation, std::uint64_t seed);

  std::size_t dim() const override { return dim_; }
  std::string name() const override { return "mlp"; }
  double value(const ParamVector& theta) const override;
  ParamVector gradient(const ParamVector& theta) const override;
  ParamVector hvp(const ParamVector& theta, const ParamVector& v) const override;
  bool has_analytic_hvp() const override { return true; }

  const GroupLayout& layout() const { return layout_; }
  const ParamVector& initial_weights() const { return init_; }
  std::size_t sample_count() const { return labels_.size(); }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden_dim() const { return hidden_; }
  int label(std::size_t i) const { return labels_[i]; }
  std::uint64_t seed() const { return seed_; }

  /// Pre-softmax outputs for sample i.
  std::array<double, 2> logits(const ParamVector& theta, std::size_t i) const;
  /// Jacobian-transpose product d(logits)/d(theta)^T * (w0, w1) for sample i.
  ParamVector logit_vjp(const ParamVector& theta, std::size_t i, double w0,
                        double w1) const;

 private:
  struct Forward;
  Forward forward(const ParamVector& theta, std::size_t i) const;

  std::size_t input_dim_;
  std::size_t hidden_;
  std::size_t dim_;
  std::uint64_t seed_;
  GroupLayout layout_;
  std::vector<double> features_;  // samples x input_dim, row-major
  std::vector<int> labels_;
  ParamVector init_;
};

std::shared_ptr<DiagQuadratic> make_intro_quadratic(std::size_t dim);
std::shared_ptr<DiagQuadratic> make_diag_quadratic(std::vector<double> diag);
std::shared_ptr<TheoremInstance> make_theorem_instance(std::size_t dim, double eps,
                                                       double l_bad, double ell_good,
                                                       std::uint64_t seed);
std::shared_ptr<MlpClassifier> make_mlp(std::size_t input_dim, std::size_t hidden,
                                        std::size_t samples, double separation,
                                        std::uint64_t seed);

/// Type tag plus parameters, enough to reconstruct any instance.
struct ProblemSpec {
  enum class Kind { intro_quadratic, diag_quadratic, theorem, mlp };

  Kind kind = Kind::intro_quadratic;
  std::size_t dim = 10;                // intro_quadratic, theorem
  std::vector<double> diag;            // diag_quadratic
  double eps = 0.02;                   // theorem
  double l_bad = 200.0;
  double ell_good = 2.0;
  std::size_t input_dim = 4;           // mlp
  std::size_t hidden = 8;
  std::size_t samples = 64;
  double separation = 2.0;
  std::uint64_t seed = 0;
  /// True when the seed came from the config rather than the global default;
  /// lets a command-line seed override only unpinned problems.
  bool seed_explicit = false;

  std::string to_json() const;
  static ProblemSpec from_json(const std::string& text);
};

std::shared_ptr<Objective> make_problem(const ProblemSpec& spec);

/// Natural group layout for optimizers: per-tensor groups for the MLP, one
/// vector group otherwise.
GroupLayout problem_layout(const Objective& f);

/// Problem-specific default start point: seeded start for TheoremInstance,
/// initial weights for the MLP, all-ones otherwise.
ParamVector default_start(const Objective& f);

}  // namespace optprobe
