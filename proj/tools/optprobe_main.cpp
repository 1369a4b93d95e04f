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

// Command-line front end.  Every subcommand reads one JSON config, validates
// it completely, and only then creates the output directory and writes CSVs.
// Exit codes: 0 success, 1 usage or configuration problem, 2 numerical
// failure (divergence, violated guarantee, degenerate spectra).

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "optprobe/config.hpp"
#include "optprobe/csv.hpp"
#include "optprobe/errors.hpp"
#include "optprobe/gauss_newton.hpp"
#include "optprobe/optim.hpp"
#include "optprobe/probe.hpp"
#include "optprobe/problems.hpp"
#include "optprobe/rng.hpp"
#include "optprobe/trajectory.hpp"

namespace {

using optprobe::config_error;
using optprobe::contract_error;
using optprobe::CsvWriter;
using optprobe::ExperimentConfig;
using optprobe::numeric_error;
using optprobe::ProblemSpec;
using optprobe::unsupported_error;

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

// Exclusive marker file so two runs cannot interleave writes into the same
// output directory.  Removed when the owning run finishes, even on error.
class DirLock {
 public:
  explicit DirLock(const std::string& dir) : path_(dir + "/.optprobe.lock") {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      if (errno == EEXIST)
        throw config_error("output directory '" + dir +
                           "' is already in use (stale " + path_ + "?)");
      throw config_error("cannot create lock file '" + path_ +
                         "': " + std::strerror(errno));
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] ssize_t n = ::write(fd_, pid.data(), pid.size());
  }
  ~DirLock() {
    if (fd_ >= 0) {
      ::close(fd_);
      ::unlink(path_.c_str());
    }
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  std::string path_;
  int fd_ = -1;
};

ExperimentConfig load_effective_config(const CliOptions& opts) {
  ExperimentConfig cfg = optprobe::load_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  // Problems without a pinned seed follow the experiment seed, so a --seed
  // override reshuffles data and start points too.
  if (cfg.has_problem && !cfg.problem.seed_explicit) cfg.problem.seed = cfg.seed;
  if (!opts.out_dir.empty()) {
    cfg.output_dir = opts.out_dir;
  } else if (const char* env = std::getenv("OPTPROBE_OUT"); env && *env) {
    cfg.output_dir = env;
  }
  if (cfg.output_dir.empty())
    throw config_error(
        "no output directory: pass --out, set OPTPROBE_OUT, or put "
        "'output_dir' in the config");
  return cfg;
}

void require_section(bool present, const std::string& cmd,
                     const std::string& section) {
  if (!present)
    throw config_error(cmd + ": config needs a '" + section + "' section");
}

std::string sanitize(const std::string& label) {
  std::string out = label;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    if (!ok) c = '-';
  }
  return out;
}

optprobe::TrainingRun base_run(const ExperimentConfig& cfg,
                               std::shared_ptr<const optprobe::Objective> obj) {
  optprobe::TrainingRun tr;
  tr.objective = std::move(obj);
  tr.x0 = optprobe::resolve_start(cfg.init, *tr.objective, cfg.seed);
  tr.train = cfg.train.algo;
  tr.lr = cfg.train.lr;
  tr.lr_relative = cfg.train.lr_relative;
  tr.steps = cfg.train.steps;
  tr.seed = cfg.seed;
  tr.gradient_noise = cfg.train.gradient_noise;
  return tr;
}

void write_loss_csv(const std::string& path, const optprobe::RunResult& res) {
  CsvWriter csv(path, {"step", "algorithm", "loss"});
  for (std::size_t t = 0; t < res.losses.size(); ++t)
    csv.row({CsvWriter::field(t), res.label, CsvWriter::field(res.losses[t])});
  csv.close();
}

// One sharpness table, one landscape table, and one histogram per direction.
void write_probe_csvs(const std::string& dir, const optprobe::ProbeReport& rep,
                      const std::string& suffix) {
  {
    CsvWriter csv(dir + "/sharpness" + suffix + ".csv",
                  {"algorithm", "sharpness", "robust_used", "ratio_to_sgd"});
    for (const auto& d : rep.directions)
      csv.row({d.algorithm, CsvWriter::field(d.sharpness.value),
               CsvWriter::field(d.sharpness.robust_used),
               CsvWriter::field(d.ratio_to_baseline)});
    csv.close();
  }
  {
    CsvWriter csv(dir + "/landscape" + suffix + ".csv",
                  {"algorithm", "eta", "loss"});
    for (const auto& d : rep.directions)
      for (const auto& pt : d.landscape)
        csv.row({d.algorithm, CsvWriter::field(pt.eta),
                 CsvWriter::field(pt.loss)});
    csv.close();
  }
  for (const auto& d : rep.directions) {
    CsvWriter csv(dir + "/histogram_" + sanitize(d.algorithm) + suffix + ".csv",
                  {"bin_lo", "bin_hi", "count"});
    for (const auto& b : d.histogram)
      csv.row({CsvWriter::field(b.lo), CsvWriter::field(b.hi),
               CsvWriter::field(b.count)});
    csv.close();
  }
}

void write_params_json(const std::string& path, const optprobe::ParamVector& x) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  std::vector<double> raw(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) raw[i] = x[i];
  j["x"] = raw;
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw config_error("cannot write '" + path + "'");
}

int cmd_train(const ExperimentConfig& cfg) {
  require_section(cfg.has_problem, "train", "problem");
  require_section(cfg.has_train, "train", "train");

  auto obj = optprobe::make_problem(cfg.problem);
  optprobe::TrainingRun tr = base_run(cfg, obj);
  if (cfg.has_probe) {
    tr.shadows = cfg.probe.algorithms;
    tr.probe_schedule = cfg.probe.schedule;
    tr.probe = cfg.probe.spec;
  }

  std::filesystem::create_directories(cfg.output_dir);
  DirLock lock(cfg.output_dir);

  optprobe::RunResult res = optprobe::run(tr);
  write_loss_csv(cfg.output_dir + "/loss.csv", res);
  for (const auto& rep : res.probes)
    write_probe_csvs(cfg.output_dir, rep, "_step" + std::to_string(rep.step));
  optprobe::save_checkpoint(res.final_state, cfg.output_dir + "/checkpoint.json");
  write_params_json(cfg.output_dir + "/params.json", res.final_x);

  std::cout << "train: " << res.label << "  steps=" << tr.steps
            << "  loss " << optprobe::format_double(res.losses.front()) << " -> "
            << optprobe::format_double(res.losses.back()) << "  probes="
            << res.probes.size() << '\n';
  return 0;
}

int cmd_probe(const ExperimentConfig& cfg) {
  require_section(cfg.has_problem, "probe", "problem");
  require_section(cfg.has_probe, "probe", "probe");
  if (cfg.probe.at_step > 1 && !cfg.has_train)
    throw config_error(
        "probe: a 'train' section is required when probe.at_step > 1 (it "
        "defines the trajectory leading to the probed point)");

  auto obj = optprobe::make_problem(cfg.problem);
  optprobe::TrainingRun tr = base_run(cfg, obj);
  tr.steps = cfg.probe.at_step;
  tr.shadows = cfg.probe.algorithms;
  tr.probe_schedule = {cfg.probe.at_step};
  tr.probe = cfg.probe.spec;

  std::filesystem::create_directories(cfg.output_dir);
  DirLock lock(cfg.output_dir);

  optprobe::RunResult res = optprobe::run(tr);
  const optprobe::ProbeReport& rep = res.probes.front();
  write_probe_csvs(cfg.output_dir, rep, "");

  std::cout << "probe: step " << rep.step << "  f(x) "
            << optprobe::format_double(rep.baseline_loss) << "  baseline "
            << rep.baseline_algorithm << '\n';
  for (const auto& d : rep.directions)
    std::cout << "  " << d.algorithm << ": sharpness "
              << optprobe::format_double(d.sharpness.value) << " ("
              << optprobe::format_double(d.ratio_to_baseline)
              << "x baseline), grad corr "
              << optprobe::format_double(d.correlation)
              << (d.sharpness.robust_used ? ", displaced re-measure" : "")
              << '\n';
  return 0;
}

int cmd_lemma(const ExperimentConfig& cfg) {
  require_section(cfg.has_problem, "lemma", "problem");
  require_section(cfg.has_lemma, "lemma", "lemma");
  if (cfg.problem.kind != ProblemSpec::Kind::theorem)
    throw config_error("lemma: problem.type must be 'theorem'");

  auto obj = optprobe::make_problem(cfg.problem);
  auto inst = std::dynamic_pointer_cast<optprobe::TheoremInstance>(obj);
  optprobe::ParamVector x0 = optprobe::resolve_start(cfg.init, *inst, cfg.seed);
  optprobe::LemmaReport rep = optprobe::verify_descent_lemma(
      *inst, x0, cfg.lemma.steps, cfg.lemma.clip_fraction);

  std::filesystem::create_directories(cfg.output_dir);
  DirLock lock(cfg.output_dir);

  {
    CsvWriter csv(cfg.output_dir + "/lemma.csv",
                  {"step", "lhs", "rhs_bound", "C1", "C2", "hypotheses_ok"});
    for (const auto& s : rep.steps)
      csv.row({CsvWriter::field(s.step), CsvWriter::field(s.lhs),
               CsvWriter::field(s.rhs), CsvWriter::field(s.c1),
               CsvWriter::field(s.c2), CsvWriter::field(s.hypotheses_ok)});
    csv.close();
  }
  {
    // Plain gradient descent at 1/L on its own trajectory, for contrast.
    CsvWriter csv(cfg.output_dir + "/lemma_gd.csv",
                  {"step", "gd_decrement", "gd_bound"});
    for (const auto& s : rep.steps)
      csv.row({CsvWriter::field(s.step), CsvWriter::field(s.gd_decrement),
               CsvWriter::field(s.gd_bound)});
    csv.close();
  }

  std::size_t bad_conclusion = 0, bad_sharpness = 0;
  for (const auto& s : rep.steps) {
    if (s.hypotheses_ok && !s.conclusion_ok) ++bad_conclusion;
    if (s.hypotheses_ok && !s.sharpness_ok) ++bad_sharpness;
  }
  std::cout << "lemma: " << rep.steps.size() << " steps, clip_fraction "
            << optprobe::format_double(rep.clip_fraction) << ", eps "
            << optprobe::format_double(rep.eps) << ", conclusion violations "
            << bad_conclusion << ", sharpness-bound violations "
            << bad_sharpness << '\n';
  if (bad_conclusion > 0)
    throw numeric_error("descent guarantee violated on " +
                        std::to_string(bad_conclusion) + " step(s)");
  return 0;
}

int cmd_gauss_newton(const ExperimentConfig& cfg) {
  require_section(cfg.has_problem, "gauss-newton", "problem");
  require_section(cfg.has_gauss_newton, "gauss-newton", "gauss_newton");
  if (cfg.problem.kind != ProblemSpec::Kind::mlp)
    throw config_error("gauss-newton: problem.type must be 'mlp'");

  auto obj = optprobe::make_problem(cfg.problem);
  auto model = std::dynamic_pointer_cast<optprobe::MlpClassifier>(obj);

  if (cfg.gauss_newton.batch_size == 0 ||
      cfg.gauss_newton.batch_size > model->sample_count())
    throw config_error("gauss_newton.batch_size: need 1 <= batch_size <= " +
                       std::to_string(model->sample_count()));

  std::vector<std::size_t> tags = cfg.gauss_newton.at_steps;
  std::sort(tags.begin(), tags.end());
  tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
  const std::size_t max_step = tags.back();
  if (max_step > 0) {
    require_section(cfg.has_train, "gauss-newton", "train");
    if (max_step > cfg.train.steps)
      throw config_error("gauss_newton.at_steps: " + std::to_string(max_step) +
                         " exceeds train.steps");
  }

  // Deterministic batch: partial Fisher-Yates over the sample indices.
  std::vector<std::size_t> pool(model->sample_count());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  optprobe::Rng brng(optprobe::derive_seed(cfg.seed, 4));
  std::vector<std::size_t> batch(cfg.gauss_newton.batch_size);
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const std::size_t k = j + brng.below(pool.size() - j);
    std::swap(pool[j], pool[k]);
    batch[j] = pool[j];
  }
  std::sort(batch.begin(), batch.end());

  optprobe::ParamVector x0 = optprobe::resolve_start(cfg.init, *model, cfg.seed);
  std::map<std::size_t, optprobe::ParamVector> snapshots;
  snapshots.emplace(0, x0);
  if (max_step > 0) {
    optprobe::TrainingRun tr = base_run(cfg, obj);
    tr.steps = max_step;
    const std::set<std::size_t> wanted(tags.begin(), tags.end());
    optprobe::run(tr, [&](std::size_t t, const optprobe::ParamVector& x,
                          const optprobe::OptimizerState&,
                          const optprobe::ShadowBank&) {
      if (wanted.count(t)) snapshots.emplace(t, x);
    });
  }

  std::filesystem::create_directories(cfg.output_dir);
  DirLock lock(cfg.output_dir);

  CsvWriter csv(cfg.output_dir + "/gauss_newton.csv",
                {"tag", "L", "ell", "L_over_ell", "eps"});
  for (std::size_t t : tags) {
    const auto it = snapshots.find(t);
    if (it == snapshots.end())
      throw contract_error("gauss-newton: missing snapshot for step " +
                           std::to_string(t));
    optprobe::GnColumns cols = optprobe::gn_columns(*model, it->second, batch);
    optprobe::RemovalReport rr =
        optprobe::coordinate_removal(cols, cfg.gauss_newton.multiplier);
    const std::string tag = "step" + std::to_string(t);
    csv.row({tag, CsvWriter::field(rr.l_full), CsvWriter::field(rr.l_reduced),
             CsvWriter::field(rr.ratio()),
             CsvWriter::field(rr.removed_fraction)});
    std::cout << "gauss-newton: " << tag << "  L "
              << optprobe::format_double(rr.l_full) << "  ell "
              << optprobe::format_double(rr.l_reduced) << "  ratio "
              << optprobe::format_double(rr.ratio()) << "  removed "
              << rr.removed << "/" << rr.p << '\n';
  }
  csv.close();
  return 0;
}

int cmd_compare(const ExperimentConfig& cfg) {
  require_section(cfg.has_problem, "compare", "problem");
  require_section(cfg.has_compare, "compare", "compare");

  auto obj = optprobe::make_problem(cfg.problem);
  optprobe::ParamVector x0 = optprobe::resolve_start(cfg.init, *obj, cfg.seed);

  std::vector<optprobe::TrainingRun> runs;
  for (const auto& entry : cfg.compare.runs) {
    optprobe::TrainingRun tr;
    tr.objective = obj;
    tr.x0 = x0;
    tr.train = entry.algo;
    tr.lr = entry.lr;
    tr.lr_relative = entry.lr_relative;
    tr.steps = cfg.compare.steps;
    tr.seed = cfg.seed;
    runs.push_back(std::move(tr));
  }

  std::filesystem::create_directories(cfg.output_dir);
  DirLock lock(cfg.output_dir);

  std::vector<optprobe::RunResult> results = optprobe::compare_convergence(runs);
  CsvWriter csv(cfg.output_dir + "/compare.csv", {"step", "algorithm", "loss"});
  for (const auto& res : results)
    for (std::size_t t = 0; t < res.losses.size(); ++t)
      csv.row({CsvWriter::field(t), res.label, CsvWriter::field(res.losses[t])});
  csv.close();

  for (const auto& res : results)
    std::cout << "compare: " << res.label << "  final loss "
              << optprobe::format_double(res.losses.back()) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"update-direction probes and clipped-descent diagnostics"};
  app.require_subcommand(1);

  CliOptions opts;
  std::string command;
  const auto add = [&](const std::string& name, const std::string& desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", opts.config_path, "JSON experiment config")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out_dir,
                    "output directory (overrides OPTPROBE_OUT and the config)");
    sub->add_option("--seed", opts.seed, "override the experiment seed");
    sub->callback([&, name] { command = name; });
    return sub;
  };
  add("train", "run one optimizer, logging losses and scheduled probes");
  add("probe", "probe candidate update directions at one training step");
  add("gauss-newton", "batch Gauss-Newton spectra and coordinate removal");
  add("lemma", "check the clipped-descent decrease guarantee per step");
  add("compare", "loss curves for several optimizers from one start");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const ExperimentConfig cfg = load_effective_config(opts);
    if (command == "train") return cmd_train(cfg);
    if (command == "probe") return cmd_probe(cfg);
    if (command == "gauss-newton") return cmd_gauss_newton(cfg);
    if (command == "lemma") return cmd_lemma(cfg);
    if (command == "compare") return cmd_compare(cfg);
    std::cerr << "error: unknown command '" << command << "'\n";
    return 1;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const contract_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const unsupported_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const numeric_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 2;
  }
}
