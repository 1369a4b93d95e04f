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
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "optprobe/optim.hpp"
#include "optprobe/probe.hpp"

namespace optprobe {

/// Optimizer choice with its hyperparameters and clipping policy.
struct AlgoConfig {
  Algorithm algorithm = Algorithm::sgd;
  Hyperparams hyper;
  ClipSpec clip;
  /// Report label; empty picks the default (algorithm plus clip suffix).
  std::string label;
};

std::string default_label(const AlgoConfig& cfg);
std::string effective_label(const AlgoConfig& cfg);

/// Pseudo-update states: one optimizer state per probed algorithm, fed the
/// same gradient stream as the live optimizer but never applied to the
/// parameters.  advance() must be called exactly once per training step.
class ShadowBank {
 public:
  ShadowBank() = default;
  ShadowBank(const GroupLayout& layout, const std::vector<AlgoConfig>& configs);

  /// Advances every shadow by one step and caches its candidate direction.
  void advance(const ParamVector& g);

  std::size_t size() const { return states_.size(); }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  /// Direction from the most recent advance().
  const ParamVector& direction(std::size_t i) const;
  const OptimizerState& state(std::size_t i) const { return states_[i]; }
  /// State by label, nullptr if absent.
  const OptimizerState* find(const std::string& label) const;

 private:
  std::vector<AlgoConfig> configs_;
  std::vector<std::string> labels_;
  std::vector<OptimizerState> states_;
  std::vector<ParamVector> directions_;
  bool advanced_ = false;
};

struct TrainingRun {
  std::shared_ptr<const Objective> objective;
  /// Start point; empty means the problem default.
  ParamVector x0;
  AlgoConfig train;
  /// Step size.  For Adafactor, lr_relative switches to the built-in
  /// RMS-scaled step size and lr is ignored.
  double lr = 0.01;
  bool lr_relative = false;
  std::size_t steps = 100;
  std::uint64_t seed = 0;
  /// Standard deviation of seeded Gaussian noise added to each gradient;
  /// 0 keeps gradients exact (full batch).
  double gradient_noise = 0.0;
  /// Extra shadow optimizers to probe alongside the live one.
  std::vector<AlgoConfig> shadows;
  /// Steps (1-based) at which to probe, before that step's live update.
  std::vector<std::size_t> probe_schedule;
  ProbeSpec probe;
};

struct RunResult {
  std::string label;
  /// losses[t] = f(x_t) for t = 0..steps; losses[0] is the start loss.
  std::vector<double> losses;
  std::vector<ProbeReport> probes;
  ParamVector final_x;
  OptimizerState final_state;
};

/// Called after each live update with the step index (1-based), the new
/// parameters, the live optimizer state, and the shadow bank.
using StepObserver = std::function<void(
    std::size_t, const ParamVector&, const OptimizerState&, const ShadowBank&)>;

/// Full training protocol per step: evaluate loss (abort on non-finite with
/// the step index), form the gradient, advance shadows, probe if scheduled,
/// then apply the live update.
RunResult run(const TrainingRun& cfg);
RunResult run(const TrainingRun& cfg, const StepObserver& observer);

/// Runs several configurations on the same objective and seed; mismatched
/// objectives or seeds are a contract violation.
std::vector<RunResult> compare_convergence(const std::vector<TrainingRun>& runs);

}  // namespace optprobe
