#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "optprobe/config.hpp"
#include "optprobe/errors.hpp"
#include "optprobe/problems.hpp"
#include "optprobe/rng.hpp"

using namespace optprobe;

namespace {

ExperimentConfig parse(const char* text) { return parse_config(text); }

void check_config_error(const char* text, const std::string& message) {
  try {
    parse_config(text);
    FAIL_CHECK("expected config_error for: " << text);
  } catch (const config_error& e) {
    CHECK(std::string(e.what()) == message);
  }
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("an empty config has no sections") {
  const ExperimentConfig cfg = parse("{}");
  CHECK(cfg.seed == 0);
  CHECK(cfg.output_dir.empty());
  CHECK_FALSE(cfg.has_problem);
  CHECK_FALSE(cfg.has_train);
  CHECK_FALSE(cfg.has_probe);
  CHECK_FALSE(cfg.has_lemma);
  CHECK_FALSE(cfg.has_gauss_newton);
  CHECK_FALSE(cfg.has_compare);
}

TEST_CASE("invalid JSON is reported as a config error") {
  try {
    parse_config("{");
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("invalid JSON") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("[1, 2]"), config_error);
}

TEST_CASE("unknown fields are rejected with their dotted path") {
  check_config_error(R"({"bogus": 1})", "bogus: unknown field");
  check_config_error(R"({"train": {"algorithm": "sgd", "wat": 1}})",
                     "train.wat: unknown field");
  check_config_error(
      R"({"train": {"algorithm": "sgd", "hyperparams": {"beta1": 0.9}}})",
      "train.hyperparams.beta1: unknown field");
  check_config_error(
      R"({"probe": {"grid": {"min": 0.1, "max": 1.0, "q": 3}}})",
      "probe.grid.q: unknown field");
}

TEST_CASE("seed and output directory") {
  const ExperimentConfig cfg =
      parse(R"({"seed": 42, "output_dir": "/tmp/x"})");
  CHECK(cfg.seed == 42);
  CHECK(cfg.output_dir == "/tmp/x");
  check_config_error(R"({"seed": -1})", "seed: expected a non-negative integer");
  check_config_error(R"({"seed": 1.5})", "seed: expected a non-negative integer");
}

TEST_CASE("problem section carries the seed-pinning flag") {
  ExperimentConfig cfg = parse(R"({"problem": {"type": "mlp", "seed": 7}})");
  REQUIRE(cfg.has_problem);
  CHECK(cfg.problem.kind == ProblemSpec::Kind::mlp);
  CHECK(cfg.problem.seed == 7);
  CHECK(cfg.problem.seed_explicit);

  cfg = parse(R"({"problem": {"type": "mlp"}})");
  CHECK_FALSE(cfg.problem.seed_explicit);

  cfg = parse(R"({"problem": {"type": "intro_quadratic", "dim": 25}})");
  CHECK(cfg.problem.kind == ProblemSpec::Kind::intro_quadratic);
  CHECK(cfg.problem.dim == 25);
}

TEST_CASE("train section") {
  const ExperimentConfig cfg = parse(R"({
    "train": {
      "algorithm": "adam",
      "hyperparams": {"beta1": 0.8, "beta2": 0.95, "eps": 1e-12},
      "clip": {"fraction": 0.25, "target": "update"},
      "label": "tuned",
      "lr": 0.003,
      "steps": 40,
      "gradient_noise": 0.5
    }
  })");
  REQUIRE(cfg.has_train);
  CHECK(cfg.train.algo.algorithm == Algorithm::adam);
  CHECK(cfg.train.algo.hyper.adam_beta1 == 0.8);
  CHECK(cfg.train.algo.hyper.adam_beta2 == 0.95);
  CHECK(cfg.train.algo.hyper.adam_eps == 1e-12);
  CHECK(cfg.train.algo.clip.enabled);
  CHECK(cfg.train.algo.clip.fraction == 0.25);
  CHECK(cfg.train.algo.clip.target == ClipSpec::Target::update);
  CHECK(cfg.train.algo.label == "tuned");
  CHECK(cfg.train.lr == 0.003);
  CHECK_FALSE(cfg.train.lr_relative);
  CHECK(cfg.train.steps == 40);
  CHECK(cfg.train.gradient_noise == 0.5);

  // Defaults when only the algorithm is given.
  const ExperimentConfig d = parse(R"({"train": {"algorithm": "sgd"}})");
  CHECK(d.train.algo.hyper.sgd_beta == 0.9);
  CHECK_FALSE(d.train.algo.clip.enabled);
  CHECK(d.train.lr == 0.01);
  CHECK(d.train.steps == 100);
  CHECK(d.train.gradient_noise == 0.0);

  check_config_error(R"({"train": {}})", "train.algorithm: missing field");
  check_config_error(R"({"train": {"algorithm": "rmsprop"}})",
                     "train.algorithm: unknown algorithm 'rmsprop'");
  check_config_error(R"({"train": {"algorithm": "sgd", "steps": 0}})",
                     "train.steps: must be positive");
  check_config_error(
      R"({"train": {"algorithm": "sgd", "gradient_noise": -1}})",
      "train.gradient_noise: must be non-negative");
}

TEST_CASE("learning rate accepts a number or the adafactor keyword") {
  const ExperimentConfig rel =
      parse(R"({"train": {"algorithm": "adafactor", "lr": "relative"}})");
  CHECK(rel.train.lr_relative);

  check_config_error(R"({"train": {"algorithm": "sgd", "lr": "relative"}})",
                     "train.lr: 'relative' is only valid for adafactor");
  check_config_error(R"({"train": {"algorithm": "sgd", "lr": "fast"}})",
                     "train.lr: expected a number or 'relative'");
  check_config_error(R"({"train": {"algorithm": "sgd", "lr": 0}})",
                     "train.lr: must be positive");
  check_config_error(R"({"train": {"algorithm": "sgd", "lr": -0.1}})",
                     "train.lr: must be positive");
}

TEST_CASE("clip subsection defaults and bounds") {
  // Presence alone enables gradient clipping at the default fraction.
  const ExperimentConfig cfg =
      parse(R"({"train": {"algorithm": "sgd", "clip": {}}})");
  CHECK(cfg.train.algo.clip.enabled);
  CHECK(cfg.train.algo.clip.fraction == 0.1);
  CHECK(cfg.train.algo.clip.target == ClipSpec::Target::gradient);

  const ExperimentConfig off = parse(
      R"({"train": {"algorithm": "sgd", "clip": {"enabled": false}}})");
  CHECK_FALSE(off.train.algo.clip.enabled);

  check_config_error(
      R"({"train": {"algorithm": "sgd", "clip": {"fraction": 0}}})",
      "train.clip.fraction: must lie in (0, 1]");
  check_config_error(
      R"({"train": {"algorithm": "sgd", "clip": {"fraction": 1.5}}})",
      "train.clip.fraction: must lie in (0, 1]");
  check_config_error(
      R"({"train": {"algorithm": "sgd", "clip": {"target": "norm"}}})",
      "train.clip.target: expected 'gradient' or 'update'");
}

TEST_CASE("hyperparameter keys are algorithm-specific") {
  const ExperimentConfig sgd = parse(
      R"({"train": {"algorithm": "sgd", "hyperparams": {"beta": 0.5}}})");
  CHECK(sgd.train.algo.hyper.sgd_beta == 0.5);

  const ExperimentConfig lion = parse(R"({
    "train": {"algorithm": "lion",
              "hyperparams": {"beta1": 0.95, "beta2": 0.98, "clip_pre_sign": true}}
  })");
  CHECK(lion.train.algo.hyper.lion_beta1 == 0.95);
  CHECK(lion.train.algo.hyper.lion_beta2 == 0.98);
  CHECK(lion.train.algo.hyper.lion_clip_pre_sign);

  check_config_error(
      R"({"train": {"algorithm": "adam", "hyperparams": {"beta": 0.9}}})",
      "train.hyperparams.beta: unknown field");
  check_config_error(
      R"({"train": {"algorithm": "adafactor", "hyperparams": {"beta1": 0.9}}})",
      "train.hyperparams.beta1: unknown field");
  check_config_error(
      R"({"train": {"algorithm": "sign_sgd", "hyperparams": {"eps": 1e-8}}})",
      "train.hyperparams.eps: unknown field");
}

TEST_CASE("probe schedules, given directly or in epochs") {
  const ExperimentConfig direct = parse(R"({
    "probe": {"algorithms": [{"algorithm": "adam"}], "schedule": [1, 5, 40]}
  })");
  REQUIRE(direct.has_probe);
  REQUIRE(direct.probe.algorithms.size() == 1);
  CHECK(direct.probe.algorithms[0].algorithm == Algorithm::adam);
  CHECK((direct.probe.schedule == std::vector<std::size_t>{1, 5, 40}));

  // Epoch e maps to the step just before that epoch begins.
  const ExperimentConfig epochs = parse(R"({
    "probe": {"schedule_epochs": [1, 3, 10], "steps_per_epoch": 10}
  })");
  CHECK((epochs.probe.schedule == std::vector<std::size_t>{1, 21, 91}));

  check_config_error(
      R"({"probe": {"schedule": [1], "schedule_epochs": [1]}})",
      "probe.schedule_epochs: cannot combine with 'schedule'");
  check_config_error(R"({"probe": {"schedule": [0]}})",
                     "probe.schedule: entries must be positive");
  check_config_error(R"({"probe": {"schedule": [-3]}})",
                     "probe.schedule: expected non-negative integers");
  check_config_error(R"({"probe": {"steps_per_epoch": 0}})",
                     "probe.steps_per_epoch: must be positive");
  check_config_error(R"({"probe": {"algorithms": []}})",
                     "probe.algorithms: expected a non-empty array");
}

TEST_CASE("probe grid and measurement options") {
  const ExperimentConfig cfg = parse(R"({
    "probe": {
      "grid": {"min": 1e-3, "max": 1.0, "points": 7},
      "delta": 0.5,
      "hvp": "central",
      "normalize": false,
      "at_step": 9
    }
  })");
  REQUIRE(cfg.probe.spec.grid.size() == 7);
  CHECK(cfg.probe.spec.grid.front() == 1e-3);
  CHECK(cfg.probe.spec.grid.back() == doctest::Approx(1.0));
  CHECK(cfg.probe.spec.robust_shift == 0.5);
  REQUIRE(cfg.probe.spec.hvp_method.has_value());
  CHECK(cfg.probe.spec.hvp_method->mode == HvpMethod::Mode::central_difference);
  CHECK_FALSE(cfg.probe.spec.normalize);
  CHECK(cfg.probe.at_step == 9);

  const ExperimentConfig d = parse(R"({"probe": {}})");
  CHECK(d.probe.spec.grid.size() == 60);
  CHECK_FALSE(d.probe.spec.hvp_method.has_value());
  CHECK(d.probe.spec.normalize);
  CHECK(d.probe.at_step == 1);

  const ExperimentConfig a = parse(R"({"probe": {"hvp": "analytic"}})");
  CHECK(a.probe.spec.hvp_method->mode == HvpMethod::Mode::analytic);

  check_config_error(R"({"probe": {"grid": {"min": 0, "max": 1}}})",
                     "probe.grid: need 0 < min < max");
  check_config_error(R"({"probe": {"grid": {"min": 2, "max": 1}}})",
                     "probe.grid: need 0 < min < max");
  check_config_error(R"({"probe": {"grid": {"points": 1}}})",
                     "probe.grid.points: need at least 2");
  check_config_error(R"({"probe": {"delta": 0}})",
                     "probe.delta: must be positive");
  check_config_error(R"({"probe": {"hvp": "exact"}})",
                     "probe.hvp: expected 'auto', 'analytic' or 'central'");
  check_config_error(R"({"probe": {"at_step": 0}})",
                     "probe.at_step: must be positive");
}

TEST_CASE("probe histogram bounds") {
  const ExperimentConfig cfg = parse(
      R"({"probe": {"histogram": {"min_exp": -3, "max_exp": 1}}})");
  REQUIRE(cfg.probe.spec.histogram_edges.size() == 5);
  CHECK(cfg.probe.spec.histogram_edges.front() == 1e-3);
  CHECK(cfg.probe.spec.histogram_edges.back() == 10.0);

  const ExperimentConfig d = parse(R"({"probe": {}})");
  CHECK(d.probe.spec.histogram_edges.size() == 15);  // decades -12..2

  check_config_error(
      R"({"probe": {"histogram": {"min_exp": 2, "max_exp": 2}}})",
      "probe.histogram: need min_exp < max_exp");
  check_config_error(
      R"({"probe": {"histogram": {"min_exp": 0.5, "max_exp": 2}}})",
      "probe.histogram.min_exp: expected an integer");
}

TEST_CASE("lemma section") {
  const ExperimentConfig cfg =
      parse(R"({"lemma": {"clip_fraction": 0.2, "steps": 7}})");
  REQUIRE(cfg.has_lemma);
  CHECK(cfg.lemma.clip_fraction == 0.2);
  CHECK(cfg.lemma.steps == 7);

  const ExperimentConfig d = parse(R"({"lemma": {}})");
  CHECK(d.lemma.clip_fraction == 0.1);
  CHECK(d.lemma.steps == 50);

  check_config_error(R"({"lemma": {"clip_fraction": 0}})",
                     "lemma.clip_fraction: must lie in (0, 1]");
  check_config_error(R"({"lemma": {"clip_fraction": 2}})",
                     "lemma.clip_fraction: must lie in (0, 1]");
  check_config_error(R"({"lemma": {"steps": 0}})",
                     "lemma.steps: must be positive");
}

TEST_CASE("gauss-newton section") {
  const ExperimentConfig cfg = parse(R"({
    "gauss_newton": {"batch_size": 8, "multiplier": 2.5, "at_steps": [0, 10]}
  })");
  REQUIRE(cfg.has_gauss_newton);
  CHECK(cfg.gauss_newton.batch_size == 8);
  CHECK(cfg.gauss_newton.multiplier == 2.5);
  CHECK((cfg.gauss_newton.at_steps == std::vector<std::size_t>{0, 10}));

  const ExperimentConfig d = parse(R"({"gauss_newton": {}})");
  CHECK(d.gauss_newton.batch_size == 16);
  CHECK(d.gauss_newton.multiplier == 4.0);
  CHECK((d.gauss_newton.at_steps == std::vector<std::size_t>{0}));

  check_config_error(R"({"gauss_newton": {"batch_size": 0}})",
                     "gauss_newton.batch_size: must be positive");
  check_config_error(R"({"gauss_newton": {"multiplier": 0}})",
                     "gauss_newton.multiplier: must be positive");
  check_config_error(R"({"gauss_newton": {"at_steps": []}})",
                     "gauss_newton.at_steps: must not be empty");
}

TEST_CASE("compare section") {
  const ExperimentConfig cfg = parse(R"({
    "compare": {
      "steps": 30,
      "runs": [
        {"algorithm": "sgd", "lr": 0.5, "clip": {"fraction": 0.2}},
        {"algorithm": "adam", "lr": 0.01, "label": "adam_small"}
      ]
    }
  })");
  REQUIRE(cfg.has_compare);
  CHECK(cfg.compare.steps == 30);
  REQUIRE(cfg.compare.runs.size() == 2);
  CHECK(cfg.compare.runs[0].algo.algorithm == Algorithm::sgd);
  CHECK(cfg.compare.runs[0].lr == 0.5);
  CHECK(cfg.compare.runs[0].algo.clip.enabled);
  CHECK(cfg.compare.runs[1].algo.label == "adam_small");

  check_config_error(R"({"compare": {"runs": []}})",
                     "compare.runs: expected a non-empty array");
  check_config_error(R"({"compare": {}})",
                     "compare.runs: expected a non-empty array");
  check_config_error(
      R"({"compare": {"runs": [{"algorithm": "sgd", "steps": 5}]}})",
      "compare.runs[0].steps: unknown field");
  check_config_error(
      R"({"compare": {"runs": [{"algorithm": "sgd", "lr": "relative"}]}})",
      "compare.runs[0].lr: 'relative' is only valid for adafactor");
}

TEST_CASE("init section and start-point resolution") {
  auto quad = make_intro_quadratic(6);

  const ExperimentConfig d = parse(R"({"init": {"type": "default"}})");
  CHECK(d.init.kind == InitSection::Kind::problem_default);
  CHECK(bitwise_equal(resolve_start(d.init, *quad, 0),
                      ParamVector::constant(6, 1.0)));

  const ExperimentConfig ones = parse(R"({"init": {"type": "ones"}})");
  CHECK(bitwise_equal(resolve_start(ones.init, *quad, 0),
                      ParamVector::constant(6, 1.0)));

  const ExperimentConfig c =
      parse(R"({"init": {"type": "constant", "value": -2.5}})");
  CHECK(bitwise_equal(resolve_start(c.init, *quad, 0),
                      ParamVector::constant(6, -2.5)));

  const ExperimentConfig g =
      parse(R"({"init": {"type": "gaussian", "scale": 0.5}})");
  const ParamVector a = resolve_start(g.init, *quad, 11);
  const ParamVector b = resolve_start(g.init, *quad, 11);
  CHECK(bitwise_equal(a, b));
  CHECK_FALSE(bitwise_equal(a, resolve_start(g.init, *quad, 12)));
  Rng mirror(derive_seed(11, 3));
  for (std::size_t i = 0; i < 6; ++i) CHECK(a[i] == 0.5 * mirror.gaussian());

  // The theorem problem brings its own seeded start.
  auto inst = make_theorem_instance(20, 0.1, 50.0, 1.0, 4);
  CHECK(bitwise_equal(resolve_start(d.init, *inst, 0), inst->start_point()));

  check_config_error(R"({"init": {"type": "spiral"}})",
                     "init.type: expected 'default', 'ones', 'constant' or 'gaussian'");
  check_config_error(R"({"init": {"scale": 0}})",
                     "init.scale: must be positive");
}

TEST_CASE("load_config reads a file") {
  const std::string path = "/tmp/optprobe_test_config.json";
  {
    std::ofstream out(path);
    out << R"({"seed": 5, "train": {"algorithm": "lion", "lr": 0.002}})";
  }
  const ExperimentConfig cfg = load_config(path);
  CHECK(cfg.seed == 5);
  CHECK(cfg.train.algo.algorithm == Algorithm::lion);
  CHECK(cfg.train.lr == 0.002);
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_config("/tmp/optprobe_no_such_file.json"), config_error);
}

}  // TEST_SUITE
