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
#include <variant>

#include "optprobe/clip.hpp"
#include "optprobe/layout.hpp"
#include "optprobe/param_vector.hpp"

namespace optprobe {

enum class Algorithm { sgd, normalized_sgd, sign_sgd, adam, adafactor, lion };

std::string algorithm_name(Algorithm alg);
Algorithm parse_algorithm(const std::string& name);

struct Hyperparams {
  // SGD family (sgd, normalized_sgd, sign_sgd)
  double sgd_beta = 0.9;
  // Adam; eps sits inside the square root and there is no bias correction.
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  // Lion
  double lion_beta1 = 0.9;
  double lion_beta2 = 0.99;
  // Update-target clipping on Lion is inert after the sign map; this opt-in
  // variant clips the momentum blend before the sign is taken instead.
  bool lion_clip_pre_sign = false;
};

// Adafactor constants (not tunable here, matching the reference recipe).
inline constexpr double kAdafactorEps1 = 1e-30;
inline constexpr double kAdafactorEps2 = 1e-3;
inline constexpr double kAdafactorClipThreshold = 1.0;

struct SgdMomentumState {
  ParamVector m;
  double beta = 0.9;
};

struct AdamState {
  ParamVector m;
  ParamVector v;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Factored second moments for matrix groups, full second moment for vector
/// groups.
struct AdafactorState {
  struct GroupMoments {
    std::vector<double> row;   // matrix groups: per-row accumulator
    std::vector<double> col;   // matrix groups: per-column accumulator
    std::vector<double> full;  // vector groups
  };
  std::vector<GroupMoments> groups;
};

struct LionState {
  ParamVector m;
  double beta1 = 0.9;
  double beta2 = 0.99;
  bool clip_pre_sign = false;
};

/// Tagged optimizer state over a group layout.  step() consumes one gradient
/// and returns the unscaled candidate update; the caller owns the step size.
class OptimizerState {
 public:
  OptimizerState() = default;

  static OptimizerState make(Algorithm alg, const GroupLayout& layout,
                             const Hyperparams& hp = {});

  Algorithm algorithm() const { return alg_; }
  const GroupLayout& layout() const { return layout_; }
  std::size_t dim() const { return layout_.dim(); }
  /// Number of completed steps.
  std::uint64_t step_count() const { return t_; }

  /// Advance one step on gradient g under the clipping policy and return the
  /// unscaled update direction.
  ParamVector step(const ParamVector& g, const ClipSpec& clip = ClipSpec::off());

  const SgdMomentumState& sgd_state() const;
  const AdamState& adam_state() const;
  const AdafactorState& adafactor_state() const;
  const LionState& lion_state() const;

  /// Exact bit comparison of step counter and every buffer.
  bool bitwise_equal(const OptimizerState& other) const;

  /// Versioned structured-text checkpoint (JSON).  Field order is fixed:
  /// format_version, algorithm, t, layout, hyper, buffers.
  std::string to_json() const;
  static OptimizerState from_json(const std::string& text);

 private:
  friend ParamVector adafactor_step(OptimizerState&, const ParamVector&,
                                    const ParamVector&, const ClipSpec&,
                                    std::optional<double>);

  ParamVector direction(const ParamVector& g, const ClipSpec& clip);

  Algorithm alg_ = Algorithm::sgd;
  GroupLayout layout_;
  std::uint64_t t_ = 0;
  std::variant<SgdMomentumState, AdamState, AdafactorState, LionState> st_;
  bool warned_inert_clip_ = false;
};

/// One optimizer step; alias of OptimizerState::step.
ParamVector candidate_update(OptimizerState& state, const ParamVector& g,
                             const ClipSpec& clip = ClipSpec::off());

/// Per-group momentum normalization to norm sqrt(group size); zero-norm
/// blocks stay zero.  State must be a normalized_sgd state.
ParamVector normalized_sgd_update(OptimizerState& state, const ParamVector& g,
                                  const ClipSpec& clip = ClipSpec::off());

/// x - eta * u; inputs are untouched.
ParamVector apply_update(const ParamVector& x, const ParamVector& u, double eta);

/// Full Adafactor step: advances the state and returns the applied delta,
/// x_next = x - delta.  Without lr_override the step size per group is
/// max(eps2, RMS(x_group)) * min(1e-2, 1/sqrt(t)).
ParamVector adafactor_step(OptimizerState& state, const ParamVector& x,
                           const ParamVector& g, const ClipSpec& clip,
                           std::optional<double> lr_override = std::nullopt);

void save_checkpoint(const OptimizerState& state, const std::string& path);
OptimizerState load_checkpoint(const std::string& path);

}  // namespace optprobe
