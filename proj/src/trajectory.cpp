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

#include "optprobe/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "optprobe/errors.hpp"
#include "optprobe/problems.hpp"
#include "optprobe/rng.hpp"

namespace optprobe {

std::string default_label(const AlgoConfig& cfg) {
  std::string label = algorithm_name(cfg.algorithm);
  if (cfg.clip.enabled) {
    char frac[32];
    std::snprintf(frac, sizeof frac, "%g", cfg.clip.fraction);
    label += "_clip_";
    label += cfg.clip.target == ClipSpec::Target::gradient ? "grad" : "update";
    label += "_";
    label += frac;
  }
  return label;
}

std::string effective_label(const AlgoConfig& cfg) {
  return cfg.label.empty() ? default_label(cfg) : cfg.label;
}

ShadowBank::ShadowBank(const GroupLayout& layout,
                       const std::vector<AlgoConfig>& configs) {
  for (const AlgoConfig& cfg : configs) {
    const std::string label = effective_label(cfg);
    for (const std::string& seen : labels_)
      if (seen == label)
        throw contract_error("shadow bank: duplicate label '" + label + "'");
    labels_.push_back(label);
    configs_.push_back(cfg);
    states_.push_back(OptimizerState::make(cfg.algorithm, layout, cfg.hyper));
    directions_.emplace_back();
  }
}

void ShadowBank::advance(const ParamVector& g) {
  for (std::size_t i = 0; i < states_.size(); ++i)
    directions_[i] = states_[i].step(g, configs_[i].clip);
  advanced_ = true;
}

const ParamVector& ShadowBank::direction(std::size_t i) const {
  if (!advanced_)
    throw contract_error("shadow bank: no directions before the first advance");
  return directions_[i];
}

const OptimizerState* ShadowBank::find(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return &states_[i];
  return nullptr;
}

namespace {

void validate_run(const TrainingRun& cfg) {
  if (!cfg.objective) throw contract_error("run: objective is null");
  if (cfg.steps == 0) throw contract_error("run: steps must be positive");
  if (!cfg.lr_relative && (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)))
    throw contract_error("run: lr must be positive and finite");
  if (cfg.lr_relative && cfg.train.algorithm != Algorithm::adafactor)
    throw contract_error("run: lr_relative requires adafactor");
  if (!(cfg.gradient_noise >= 0.0) || !std::isfinite(cfg.gradient_noise))
    throw contract_error("run: gradient_noise must be non-negative");
  for (std::size_t s : cfg.probe_schedule)
    if (s < 1 || s > cfg.steps)
      throw contract_error("run: probe schedule entries must lie in [1, steps]");
}

double checked_loss(const Objective& f, const ParamVector& x, std::size_t step) {
  const double loss = f.value(x);
  if (!std::isfinite(loss))
    throw numeric_error(
        "training diverged: non-finite loss at step " + std::to_string(step),
        step);
  return loss;
}

}  // namespace

RunResult run(const TrainingRun& cfg) { return run(cfg, StepObserver()); }

RunResult run(const TrainingRun& cfg, const StepObserver& observer) {
  validate_run(cfg);
  const Objective& f = *cfg.objective;

  ParamVector x = cfg.x0.size() == 0 ? default_start(f) : cfg.x0;
  if (x.size() != f.dim()) throw contract_error("run: start point dimension mismatch");

  const GroupLayout layout = problem_layout(f);
  OptimizerState live =
      OptimizerState::make(cfg.train.algorithm, layout, cfg.train.hyper);

  // The live algorithm is shadowed too, so probes always include it and the
  // bank doubles as a bit-level cross-check of the live state.
  std::vector<AlgoConfig> bank_cfgs;
  bank_cfgs.push_back(cfg.train);
  const std::string train_label = effective_label(cfg.train);
  for (const AlgoConfig& sc : cfg.shadows)
    if (effective_label(sc) != train_label) bank_cfgs.push_back(sc);
  ShadowBank bank(layout, bank_cfgs);

  Rng noise_rng(derive_seed(cfg.seed, 2));

  RunResult res;
  res.label = train_label;
  res.losses.reserve(cfg.steps + 1);

  for (std::size_t t = 1; t <= cfg.steps; ++t) {
    res.losses.push_back(checked_loss(f, x, t - 1));

    ParamVector g = gradient(f, x);
    if (cfg.gradient_noise > 0.0)
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] += cfg.gradient_noise * noise_rng.gaussian();

    bank.advance(g);

    if (std::find(cfg.probe_schedule.begin(), cfg.probe_schedule.end(), t) !=
        cfg.probe_schedule.end()) {
      std::vector<std::pair<std::string, ParamVector>> dirs;
      dirs.reserve(bank.size());
      for (std::size_t i = 0; i < bank.size(); ++i)
        dirs.emplace_back(bank.label(i), bank.direction(i));
      res.probes.push_back(probe_directions(f, x, dirs, cfg.probe, t));
    }

    if (cfg.lr_relative) {
      const ParamVector delta =
          adafactor_step(live, x, g, cfg.train.clip, std::nullopt);
      x = apply_update(x, delta, 1.0);
    } else {
      const ParamVector u = live.step(g, cfg.train.clip);
      x = apply_update(x, u, cfg.lr);
    }

    if (observer) observer(t, x, live, bank);
  }
  res.losses.push_back(checked_loss(f, x, cfg.steps));
  res.final_x = std::move(x);
  res.final_state = std::move(live);
  return res;
}

std::vector<RunResult> compare_convergence(const std::vector<TrainingRun>& runs) {
  if (runs.empty()) throw contract_error("compare: no runs");
  for (const TrainingRun& r : runs) {
    if (r.objective != runs.front().objective)
      throw contract_error("compare: runs must share one objective instance");
    if (r.seed != runs.front().seed)
      throw contract_error("compare: runs must share the seed");
  }
  std::vector<RunResult> out;
  out.reserve(runs.size());
  std::vector<std::string> labels;
  for (const TrainingRun& r : runs) {
    const std::string label = effective_label(r.train);
    for (const std::string& seen : labels)
      if (seen == label)
        throw contract_error("compare: duplicate run label '" + label + "'");
    labels.push_back(label);
    out.push_back(run(r));
  }
  return out;
}

}  // namespace optprobe
