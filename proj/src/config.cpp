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

#include "optprobe/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "optprobe/errors.hpp"
#include "optprobe/json_util.hpp"
#include "optprobe/problem_json.hpp"
#include "optprobe/rng.hpp"

namespace optprobe {
namespace {

namespace ju = jsonu;
using nlohmann::json;

ClipSpec parse_clip(const json& j, const std::string& path) {
  ju::require_keys(j, path, {"enabled", "fraction", "target"});
  ClipSpec spec;
  spec.enabled = ju::get_bool_or(j, path, "enabled", true);
  spec.fraction = ju::get_number_or(j, path, "fraction", 0.1);
  if (!(spec.fraction > 0.0) || spec.fraction > 1.0)
    throw config_error(ju::join(path, "fraction") + ": must lie in (0, 1]");
  const std::string target = ju::get_string_or(j, path, "target", "gradient");
  if (target == "gradient") {
    spec.target = ClipSpec::Target::gradient;
  } else if (target == "update") {
    spec.target = ClipSpec::Target::update;
  } else {
    throw config_error(ju::join(path, "target") +
                       ": expected 'gradient' or 'update'");
  }
  return spec;
}

Hyperparams parse_hyper(const json& j, const std::string& path, Algorithm alg) {
  Hyperparams hp;
  switch (alg) {
    case Algorithm::sgd:
    case Algorithm::normalized_sgd:
    case Algorithm::sign_sgd:
      ju::require_keys(j, path, {"beta"});
      hp.sgd_beta = ju::get_number_or(j, path, "beta", hp.sgd_beta);
      break;
    case Algorithm::adam:
      ju::require_keys(j, path, {"beta1", "beta2", "eps"});
      hp.adam_beta1 = ju::get_number_or(j, path, "beta1", hp.adam_beta1);
      hp.adam_beta2 = ju::get_number_or(j, path, "beta2", hp.adam_beta2);
      hp.adam_eps = ju::get_number_or(j, path, "eps", hp.adam_eps);
      break;
    case Algorithm::adafactor:
      ju::require_keys(j, path, {});
      break;
    case Algorithm::lion:
      ju::require_keys(j, path, {"beta1", "beta2", "clip_pre_sign"});
      hp.lion_beta1 = ju::get_number_or(j, path, "beta1", hp.lion_beta1);
      hp.lion_beta2 = ju::get_number_or(j, path, "beta2", hp.lion_beta2);
      hp.lion_clip_pre_sign =
          ju::get_bool_or(j, path, "clip_pre_sign", hp.lion_clip_pre_sign);
      break;
  }
  return hp;
}

// check_keys is off when the caller owns the key check (train and compare
// entries carry lr and friends next to the algorithm fields).
AlgoConfig parse_algo(const json& j, const std::string& path,
                      bool check_keys = true) {
  if (check_keys)
    ju::require_keys(j, path, {"algorithm", "clip", "hyperparams", "label"});
  AlgoConfig cfg;
  const std::string name = ju::get_string(j, path, "algorithm");
  try {
    cfg.algorithm = parse_algorithm(name);
  } catch (const contract_error&) {
    throw config_error(ju::join(path, "algorithm") + ": unknown algorithm '" +
                       name + "'");
  }
  if (ju::has(j, "clip")) cfg.clip = parse_clip(j.at("clip"), ju::join(path, "clip"));
  if (ju::has(j, "hyperparams"))
    cfg.hyper = parse_hyper(j.at("hyperparams"), ju::join(path, "hyperparams"),
                            cfg.algorithm);
  cfg.label = ju::get_string_or(j, path, "label", "");
  return cfg;
}

void parse_lr(const json& j, const std::string& path, Algorithm alg, double* lr,
              bool* relative) {
  if (!j.contains("lr")) return;
  const json& v = j.at("lr");
  if (v.is_string()) {
    if (v.get<std::string>() != "relative")
      throw config_error(ju::join(path, "lr") +
                         ": expected a number or 'relative'");
    if (alg != Algorithm::adafactor)
      throw config_error(ju::join(path, "lr") +
                         ": 'relative' is only valid for adafactor");
    *relative = true;
    return;
  }
  if (!v.is_number())
    throw config_error(ju::join(path, "lr") + ": expected a number or 'relative'");
  *lr = v.get<double>();
  if (!(*lr > 0.0))
    throw config_error(ju::join(path, "lr") + ": must be positive");
}

TrainSection parse_train(const json& j, const std::string& path) {
  ju::require_keys(j, path,
                   {"algorithm", "clip", "hyperparams", "label", "lr", "steps",
                    "gradient_noise"});
  TrainSection t;
  t.algo = parse_algo(j, path, /*check_keys=*/false);
  parse_lr(j, path, t.algo.algorithm, &t.lr, &t.lr_relative);
  t.steps = static_cast<std::size_t>(ju::get_uint_or(j, path, "steps", 100));
  if (t.steps == 0) throw config_error(ju::join(path, "steps") + ": must be positive");
  t.gradient_noise = ju::get_number_or(j, path, "gradient_noise", 0.0);
  if (!(t.gradient_noise >= 0.0))
    throw config_error(ju::join(path, "gradient_noise") + ": must be non-negative");
  return t;
}

std::vector<std::size_t> parse_steps_array(const json& j, const std::string& path,
                                           const char* key, bool allow_zero) {
  const json& arr = j.at(key);
  if (!arr.is_array())
    throw config_error(ju::join(path, key) + ": expected an array");
  std::vector<std::size_t> out;
  for (const json& e : arr) {
    if (!e.is_number_unsigned())
      throw config_error(ju::join(path, key) +
                         ": expected non-negative integers");
    const std::size_t v = e.get<std::size_t>();
    if (!allow_zero && v == 0)
      throw config_error(ju::join(path, key) + ": entries must be positive");
    out.push_back(v);
  }
  return out;
}

ProbeSection parse_probe(const json& j, const std::string& path) {
  ju::require_keys(j, path,
                   {"algorithms", "schedule", "schedule_epochs", "steps_per_epoch",
                    "grid", "delta", "hvp", "normalize", "histogram", "at_step"});
  ProbeSection p;
  if (ju::has(j, "algorithms")) {
    const json& arr = j.at("algorithms");
    if (!arr.is_array() || arr.empty())
      throw config_error(ju::join(path, "algorithms") +
                         ": expected a non-empty array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      p.algorithms.push_back(parse_algo(
          arr.at(i), ju::join(path, "algorithms[" + std::to_string(i) + "]")));
  }
  p.steps_per_epoch =
      static_cast<std::size_t>(ju::get_uint_or(j, path, "steps_per_epoch", 10));
  if (p.steps_per_epoch == 0)
    throw config_error(ju::join(path, "steps_per_epoch") + ": must be positive");
  if (ju::has(j, "schedule") && ju::has(j, "schedule_epochs"))
    throw config_error(ju::join(path, "schedule_epochs") +
                       ": cannot combine with 'schedule'");
  if (ju::has(j, "schedule"))
    p.schedule = parse_steps_array(j, path, "schedule", false);
  if (ju::has(j, "schedule_epochs")) {
    // Epoch e probes before the first step of that epoch.
    for (std::size_t e : parse_steps_array(j, path, "schedule_epochs", false))
      p.schedule.push_back((e - 1) * p.steps_per_epoch + 1);
  }
  if (ju::has(j, "grid")) {
    const json& g = j.at("grid");
    const std::string gpath = ju::join(path, "grid");
    ju::require_keys(g, gpath, {"min", "max", "points"});
    const double lo = ju::get_number_or(g, gpath, "min", 1e-6);
    const double hi = ju::get_number_or(g, gpath, "max", 10.0);
    const std::size_t points =
        static_cast<std::size_t>(ju::get_uint_or(g, gpath, "points", 60));
    if (!(lo > 0.0) || !(hi > lo))
      throw config_error(gpath + ": need 0 < min < max");
    if (points < 2) throw config_error(ju::join(gpath, "points") + ": need at least 2");
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
      grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) /
                                           static_cast<double>(points - 1));
    p.spec.grid = std::move(grid);
  }
  p.spec.robust_shift = ju::get_number_or(j, path, "delta", 0.01);
  if (!(p.spec.robust_shift > 0.0))
    throw config_error(ju::join(path, "delta") + ": must be positive");
  const std::string hvp = ju::get_string_or(j, path, "hvp", "auto");
  if (hvp == "analytic") {
    p.spec.hvp_method = HvpMethod::analytic();
  } else if (hvp == "central") {
    p.spec.hvp_method = HvpMethod::central();
  } else if (hvp != "auto") {
    throw config_error(ju::join(path, "hvp") +
                       ": expected 'auto', 'analytic' or 'central'");
  }
  p.spec.normalize = ju::get_bool_or(j, path, "normalize", true);
  if (ju::has(j, "histogram")) {
    const json& h = j.at("histogram");
    const std::string hpath = ju::join(path, "histogram");
    ju::require_keys(h, hpath, {"min_exp", "max_exp"});
    if (h.contains("min_exp")) {
      if (!h.at("min_exp").is_number_integer())
        throw config_error(ju::join(hpath, "min_exp") + ": expected an integer");
      p.hist_min_exp = h.at("min_exp").get<int>();
    }
    if (h.contains("max_exp")) {
      if (!h.at("max_exp").is_number_integer())
        throw config_error(ju::join(hpath, "max_exp") + ": expected an integer");
      p.hist_max_exp = h.at("max_exp").get<int>();
    }
    if (p.hist_min_exp >= p.hist_max_exp)
      throw config_error(hpath + ": need min_exp < max_exp");
  }
  p.spec.histogram_edges = decade_edges(p.hist_min_exp, p.hist_max_exp);
  p.at_step = static_cast<std::size_t>(ju::get_uint_or(j, path, "at_step", 1));
  if (p.at_step == 0)
    throw config_error(ju::join(path, "at_step") + ": must be positive");
  return p;
}

LemmaSection parse_lemma(const json& j, const std::string& path) {
  ju::require_keys(j, path, {"clip_fraction", "steps"});
  LemmaSection l;
  l.clip_fraction = ju::get_number_or(j, path, "clip_fraction", 0.1);
  if (!(l.clip_fraction > 0.0) || l.clip_fraction > 1.0)
    throw config_error(ju::join(path, "clip_fraction") + ": must lie in (0, 1]");
  l.steps = static_cast<std::size_t>(ju::get_uint_or(j, path, "steps", 50));
  if (l.steps == 0) throw config_error(ju::join(path, "steps") + ": must be positive");
  return l;
}

GnSection parse_gn(const json& j, const std::string& path) {
  ju::require_keys(j, path, {"batch_size", "multiplier", "at_steps"});
  GnSection g;
  g.batch_size = static_cast<std::size_t>(ju::get_uint_or(j, path, "batch_size", 16));
  if (g.batch_size == 0)
    throw config_error(ju::join(path, "batch_size") + ": must be positive");
  g.multiplier = ju::get_number_or(j, path, "multiplier", 4.0);
  if (!(g.multiplier > 0.0))
    throw config_error(ju::join(path, "multiplier") + ": must be positive");
  if (ju::has(j, "at_steps")) {
    g.at_steps = parse_steps_array(j, path, "at_steps", true);
    if (g.at_steps.empty())
      throw config_error(ju::join(path, "at_steps") + ": must not be empty");
  }
  return g;
}

CompareSection parse_compare(const json& j, const std::string& path) {
  ju::require_keys(j, path, {"runs", "steps"});
  CompareSection c;
  c.steps = static_cast<std::size_t>(ju::get_uint_or(j, path, "steps", 100));
  if (c.steps == 0) throw config_error(ju::join(path, "steps") + ": must be positive");
  if (!j.contains("runs") || !j.at("runs").is_array() || j.at("runs").empty())
    throw config_error(ju::join(path, "runs") + ": expected a non-empty array");
  const json& arr = j.at("runs");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string rpath = ju::join(path, "runs[" + std::to_string(i) + "]");
    const json& rj = arr.at(i);
    ju::require_keys(rj, rpath, {"algorithm", "clip", "hyperparams", "label", "lr"});
    CompareEntry e;
    e.algo = parse_algo(rj, rpath, /*check_keys=*/false);
    parse_lr(rj, rpath, e.algo.algorithm, &e.lr, &e.lr_relative);
    c.runs.push_back(std::move(e));
  }
  return c;
}

InitSection parse_init(const json& j, const std::string& path) {
  ju::require_keys(j, path, {"type", "value", "scale"});
  InitSection init;
  const std::string type = ju::get_string_or(j, path, "type", "default");
  if (type == "default") {
    init.kind = InitSection::Kind::problem_default;
  } else if (type == "ones") {
    init.kind = InitSection::Kind::ones;
  } else if (type == "constant") {
    init.kind = InitSection::Kind::constant;
  } else if (type == "gaussian") {
    init.kind = InitSection::Kind::gaussian;
  } else {
    throw config_error(ju::join(path, "type") +
                       ": expected 'default', 'ones', 'constant' or 'gaussian'");
  }
  init.value = ju::get_number_or(j, path, "value", 1.0);
  init.scale = ju::get_number_or(j, path, "scale", 1.0);
  if (!(init.scale > 0.0))
    throw config_error(ju::join(path, "scale") + ": must be positive");
  return init;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config: invalid JSON: ") + e.what());
  }
  ju::require_keys(j, "",
                   {"seed", "output_dir", "problem", "init", "train", "probe",
                    "lemma", "gauss_newton", "compare"});

  ExperimentConfig cfg;
  cfg.seed = ju::get_uint_or(j, "", "seed", 0);
  cfg.output_dir = ju::get_string_or(j, "", "output_dir", "");

  if (ju::has(j, "problem")) {
    cfg.problem = parse_problem_spec(j.at("problem"), "problem");
    cfg.has_problem = true;
  }
  if (ju::has(j, "init")) cfg.init = parse_init(j.at("init"), "init");
  if (ju::has(j, "train")) {
    cfg.train = parse_train(j.at("train"), "train");
    cfg.has_train = true;
  }
  if (ju::has(j, "probe")) {
    cfg.probe = parse_probe(j.at("probe"), "probe");
    cfg.has_probe = true;
  }
  if (ju::has(j, "lemma")) {
    cfg.lemma = parse_lemma(j.at("lemma"), "lemma");
    cfg.has_lemma = true;
  }
  if (ju::has(j, "gauss_newton")) {
    cfg.gauss_newton = parse_gn(j.at("gauss_newton"), "gauss_newton");
    cfg.has_gauss_newton = true;
  }
  if (ju::has(j, "compare")) {
    cfg.compare = parse_compare(j.at("compare"), "compare");
    cfg.has_compare = true;
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ParamVector resolve_start(const InitSection& init, const Objective& f,
                          std::uint64_t seed) {
  switch (init.kind) {
    case InitSection::Kind::problem_default:
      return default_start(f);
    case InitSection::Kind::ones:
      return ParamVector::constant(f.dim(), 1.0);
    case InitSection::Kind::constant:
      return ParamVector::constant(f.dim(), init.value);
    case InitSection::Kind::gaussian: {
      Rng rng(derive_seed(seed, 3));
      ParamVector x = ParamVector::zeros(f.dim());
      for (std::size_t i = 0; i < f.dim(); ++i)
        x[i] = init.scale * rng.gaussian();
      return x;
    }
  }
  throw contract_error("init: unknown kind");
}

}  // namespace optprobe
