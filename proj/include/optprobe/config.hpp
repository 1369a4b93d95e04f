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
#include <string>
#include <vector>

#include "optprobe/problems.hpp"
#include "optprobe/trajectory.hpp"

namespace optprobe {

// Experiment configuration, loaded from a single JSON file with a strict
// schema: unknown fields are rejected with their dotted path.  Which sections
// must be present depends on the subcommand.

struct InitSection {
  enum class Kind { problem_default, ones, constant, gaussian };
  Kind kind = Kind::problem_default;
  double value = 1.0;   // constant
  double scale = 1.0;   // gaussian
};

struct TrainSection {
  AlgoConfig algo;
  double lr = 0.01;
  bool lr_relative = false;
  std::size_t steps = 100;
  double gradient_noise = 0.0;
};

struct ProbeSection {
  std::vector<AlgoConfig> algorithms;
  std::vector<std::size_t> schedule;
  std::size_t steps_per_epoch = 10;
  ProbeSpec spec;
  int hist_min_exp = -12;
  int hist_max_exp = 2;
  /// probe subcommand: number of warmup steps; the probe fires at this step.
  std::size_t at_step = 1;
};

struct LemmaSection {
  double clip_fraction = 0.1;
  std::size_t steps = 50;
};

struct GnSection {
  std::size_t batch_size = 16;
  double multiplier = 4.0;
  /// Training step counts at which to evaluate (0 = initial weights).
  std::vector<std::size_t> at_steps = {0};
};

struct CompareEntry {
  AlgoConfig algo;
  double lr = 0.01;
  bool lr_relative = false;
};

struct CompareSection {
  std::vector<CompareEntry> runs;
  std::size_t steps = 100;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string output_dir;

  ProblemSpec problem;
  InitSection init;
  TrainSection train;
  ProbeSection probe;
  LemmaSection lemma;
  GnSection gauss_newton;
  CompareSection compare;

  bool has_problem = false;
  bool has_train = false;
  bool has_probe = false;
  bool has_lemma = false;
  bool has_gauss_newton = false;
  bool has_compare = false;
};

/// Parses and validates; throws config_error with the offending field path.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Start point for the configured problem (seed feeds the gaussian init).
ParamVector resolve_start(const InitSection& init, const Objective& f,
                          std::uint64_t seed);

}  // namespace optprobe
