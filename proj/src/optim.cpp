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

#include "optprobe/optim.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "optprobe/errors.hpp"
#include "optprobe/json_util.hpp"
#include "optprobe/kernels.hpp"

namespace optprobe {
namespace {

bool bits_eq(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  return a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

double rms(const double* x, std::size_t n) {
  return std::sqrt(kern::ops().sum_sq(x, n) / static_cast<double>(n));
}

}  // namespace

std::string algorithm_name(Algorithm alg) {
  switch (alg) {
    case Algorithm::sgd: return "sgd";
    case Algorithm::normalized_sgd: return "normalized_sgd";
    case Algorithm::sign_sgd: return "sign_sgd";
    case Algorithm::adam: return "adam";
    case Algorithm::adafactor: return "adafactor";
    case Algorithm::lion: return "lion";
  }
  throw contract_error("unknown algorithm");
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "sgd") return Algorithm::sgd;
  if (name == "normalized_sgd") return Algorithm::normalized_sgd;
  if (name == "sign_sgd") return Algorithm::sign_sgd;
  if (name == "adam") return Algorithm::adam;
  if (name == "adafactor") return Algorithm::adafactor;
  if (name == "lion") return Algorithm::lion;
  throw contract_error("unknown algorithm name '" + name + "'");
}

OptimizerState OptimizerState::make(Algorithm alg, const GroupLayout& layout,
                                    const Hyperparams& hp) {
  if (layout.dim() == 0) throw contract_error("optimizer: empty layout");
  OptimizerState st;
  st.alg_ = alg;
  st.layout_ = layout;
  const std::size_t d = layout.dim();
  switch (alg) {
    case Algorithm::sgd:
    case Algorithm::normalized_sgd:
    case Algorithm::sign_sgd: {
      if (!(hp.sgd_beta >= 0.0) || hp.sgd_beta >= 1.0)
        throw contract_error("optimizer: sgd beta must lie in [0, 1)");
      st.st_ = SgdMomentumState{ParamVector::zeros(d), hp.sgd_beta};
      break;
    }
    case Algorithm::adam: {
      if (!(hp.adam_beta1 >= 0.0) || hp.adam_beta1 >= 1.0 ||
          !(hp.adam_beta2 >= 0.0) || hp.adam_beta2 >= 1.0)
        throw contract_error("optimizer: adam betas must lie in [0, 1)");
      if (!(hp.adam_eps >= 0.0))
        throw contract_error("optimizer: adam eps must be non-negative");
      st.st_ = AdamState{ParamVector::zeros(d), ParamVector::zeros(d),
                         hp.adam_beta1, hp.adam_beta2, hp.adam_eps};
      break;
    }
    case Algorithm::adafactor: {
      AdafactorState a;
      a.groups.resize(layout.group_count());
      for (std::size_t gi = 0; gi < layout.group_count(); ++gi) {
        const Group& g = layout.group(gi);
        if (g.is_matrix()) {
          a.groups[gi].row.assign(g.rows, 0.0);
          a.groups[gi].col.assign(g.cols, 0.0);
        } else {
          a.groups[gi].full.assign(g.rows, 0.0);
        }
      }
      st.st_ = std::move(a);
      break;
    }
    case Algorithm::lion: {
      if (!(hp.lion_beta1 >= 0.0) || hp.lion_beta1 >= 1.0 ||
          !(hp.lion_beta2 >= 0.0) || hp.lion_beta2 >= 1.0)
        throw contract_error("optimizer: lion betas must lie in [0, 1)");
      st.st_ =
          LionState{ParamVector::zeros(d), hp.lion_beta1, hp.lion_beta2,
                    hp.lion_clip_pre_sign};
      break;
    }
  }
  return st;
}

const SgdMomentumState& OptimizerState::sgd_state() const {
  if (const auto* s = std::get_if<SgdMomentumState>(&st_)) return *s;
  throw contract_error("optimizer: not an sgd-family state");
}
const AdamState& OptimizerState::adam_state() const {
  if (const auto* s = std::get_if<AdamState>(&st_)) return *s;
  throw contract_error("optimizer: not an adam state");
}
const AdafactorState& OptimizerState::adafactor_state() const {
  if (const auto* s = std::get_if<AdafactorState>(&st_)) return *s;
  throw contract_error("optimizer: not an adafactor state");
}
const LionState& OptimizerState::lion_state() const {
  if (const auto* s = std::get_if<LionState>(&st_)) return *s;
  throw contract_error("optimizer: not a lion state");
}

ParamVector OptimizerState::step(const ParamVector& g, const ClipSpec& clip) {
  if (layout_.dim() == 0) throw contract_error("optimizer: uninitialized state");
  if (g.size() != layout_.dim())
    throw contract_error("optimizer: gradient dimension mismatch");
  ++t_;
  return direction(g, clip);
}

ParamVector OptimizerState::direction(const ParamVector& g, const ClipSpec& clip) {
  const auto& k = kern::ops();
  const std::size_t d = layout_.dim();

  const bool clip_grad = clip.enabled && clip.target == ClipSpec::Target::gradient;
  const bool clip_update = clip.enabled && clip.target == ClipSpec::Target::update;
  // Numerator-only policy: the clipped gradient feeds first moments; second
  // moments always see the raw gradient.
  ParamVector clipped_g;
  if (clip_grad) clipped_g = optprobe::clip(g, clip).clipped;
  const ParamVector& gin = clip_grad ? clipped_g : g;

  ParamVector u = ParamVector::zeros(d);
  switch (alg_) {
    case Algorithm::sgd: {
      auto& s = std::get<SgdMomentumState>(st_);
      k.ema(s.beta, s.m.data(), gin.data(), d);
      u = s.m;
      break;
    }
    case Algorithm::normalized_sgd: {
      auto& s = std::get<SgdMomentumState>(st_);
      k.ema(s.beta, s.m.data(), gin.data(), d);
      for (std::size_t gi = 0; gi < layout_.group_count(); ++gi) {
        const std::size_t o = layout_.offset(gi);
        const std::size_t n = layout_.group(gi).size();
        const double norm = std::sqrt(k.sum_sq(s.m.data() + o, n));
        if (norm == 0.0) continue;  // zero block stays zero
        const double scale = std::sqrt(static_cast<double>(n)) / norm;
        k.scale(scale, s.m.data() + o, u.data() + o, n);
      }
      break;
    }
    case Algorithm::sign_sgd: {
      auto& s = std::get<SgdMomentumState>(st_);
      k.ema(s.beta, s.m.data(), gin.data(), d);
      k.sign(s.m.data(), u.data(), d);
      break;
    }
    case Algorithm::adam: {
      auto& s = std::get<AdamState>(st_);
      k.ema(s.beta1, s.m.data(), gin.data(), d);
      k.ema_sq_shift(s.beta2, s.v.data(), g.data(), 0.0, d);
      k.adam_dir(s.m.data(), s.v.data(), s.eps, u.data(), d);
      break;
    }
    case Algorithm::adafactor: {
      auto& s = std::get<AdafactorState>(st_);
      const double beta2t =
          1.0 - std::pow(static_cast<double>(t_), -0.8);
      for (std::size_t gi = 0; gi < layout_.group_count(); ++gi) {
        const Group& grp = layout_.group(gi);
        const std::size_t o = layout_.offset(gi);
        auto& gm = s.groups[gi];
        if (grp.is_matrix()) {
          const std::size_t m = grp.rows;
          const std::size_t n = grp.cols;
          std::vector<double> col_acc(n, 0.0);
          for (std::size_t i = 0; i < m; ++i) {
            const double* grow = g.data() + o + i * n;
            const double rs = k.sum_sq_shift(grow, kAdafactorEps1, n);
            gm.row[i] = beta2t * gm.row[i] + (1.0 - beta2t) * rs;
            k.acc_sq_shift(1.0, grow, kAdafactorEps1, col_acc.data(), n);
          }
          k.axpby(beta2t, gm.col.data(), 1.0 - beta2t, col_acc.data(),
                  gm.col.data(), n);
          double sum_r = 0.0;
          for (double r : gm.row) sum_r += r;
          std::vector<double> denom(n);
          for (std::size_t i = 0; i < m; ++i) {
            k.scale(gm.row[i] / sum_r, gm.col.data(), denom.data(), n);
            k.div_sqrt(gin.data() + o + i * n, denom.data(),
                       u.data() + o + i * n, n);
          }
        } else {
          const std::size_t n = grp.size();
          k.ema_sq_shift(beta2t, gm.full.data(), g.data() + o, kAdafactorEps1, n);
          k.div_sqrt(gin.data() + o, gm.full.data(), u.data() + o, n);
        }
        // per-group update clipping at RMS threshold d
        const std::size_t n = grp.size();
        const double rms_u = rms(u.data() + o, n);
        const double denom = std::max(1.0, rms_u / kAdafactorClipThreshold);
        k.scale(1.0 / denom, u.data() + o, u.data() + o, n);
      }
      break;
    }
    case Algorithm::lion: {
      auto& s = std::get<LionState>(st_);
      ParamVector blend = axpby(s.beta1, s.m, 1.0 - s.beta1, gin);
      if (clip_update && s.clip_pre_sign)
        blend = optprobe::clip(blend, clip).clipped;
      k.sign(blend.data(), u.data(), d);
      k.ema(s.beta2, s.m.data(), gin.data(), d);
      if (clip_update && !s.clip_pre_sign) {
        if (!warned_inert_clip_) {
          std::fprintf(stderr,
                       "warning: update clipping after the lion sign map is "
                       "inert on unit entries\n");
          warned_inert_clip_ = true;
        }
        return optprobe::clip(u, clip).clipped;
      }
      return u;
    }
  }
  if (clip_update) u = optprobe::clip(u, clip).clipped;
  return u;
}

bool OptimizerState::bitwise_equal(const OptimizerState& other) const {
  if (alg_ != other.alg_ || t_ != other.t_ || !(layout_ == other.layout_))
    return false;
  if (st_.index() != other.st_.index()) return false;
  switch (alg_) {
    case Algorithm::sgd:
    case Algorithm::normalized_sgd:
    case Algorithm::sign_sgd: {
      const auto& a = std::get<SgdMomentumState>(st_);
      const auto& b = std::get<SgdMomentumState>(other.st_);
      return a.beta == b.beta && ::optprobe::bitwise_equal(a.m, b.m);
    }
    case Algorithm::adam: {
      const auto& a = std::get<AdamState>(st_);
      const auto& b = std::get<AdamState>(other.st_);
      return a.beta1 == b.beta1 && a.beta2 == b.beta2 && a.eps == b.eps &&
             ::optprobe::bitwise_equal(a.m, b.m) && ::optprobe::bitwise_equal(a.v, b.v);
    }
    case Algorithm::adafactor: {
      const auto& a = std::get<AdafactorState>(st_);
      const auto& b = std::get<AdafactorState>(other.st_);
      if (a.groups.size() != b.groups.size()) return false;
      for (std::size_t i = 0; i < a.groups.size(); ++i) {
        if (!bits_eq(a.groups[i].row, b.groups[i].row) ||
            !bits_eq(a.groups[i].col, b.groups[i].col) ||
            !bits_eq(a.groups[i].full, b.groups[i].full))
          return false;
      }
      return true;
    }
    case Algorithm::lion: {
      const auto& a = std::get<LionState>(st_);
      const auto& b = std::get<LionState>(other.st_);
      return a.beta1 == b.beta1 && a.beta2 == b.beta2 &&
             a.clip_pre_sign == b.clip_pre_sign && ::optprobe::bitwise_equal(a.m, b.m);
    }
  }
  return false;
}

std::string OptimizerState::to_json() const {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["algorithm"] = algorithm_name(alg_);
  j["t"] = t_;
  nlohmann::ordered_json groups = nlohmann::ordered_json::array();
  for (const Group& g : layout_.groups()) {
    nlohmann::ordered_json gj;
    gj["name"] = g.name;
    gj["rows"] = g.rows;
    gj["cols"] = g.cols;
    groups.push_back(gj);
  }
  j["layout"] = groups;

  nlohmann::ordered_json hyper = nlohmann::ordered_json::object();
  nlohmann::ordered_json buffers = nlohmann::ordered_json::object();
  switch (alg_) {
    case Algorithm::sgd:
    case Algorithm::normalized_sgd:
    case Algorithm::sign_sgd: {
      const auto& s = std::get<SgdMomentumState>(st_);
      hyper["beta"] = s.beta;
      buffers["m"] = s.m.values();
      break;
    }
    case Algorithm::adam: {
      const auto& s = std::get<AdamState>(st_);
      hyper["beta1"] = s.beta1;
      hyper["beta2"] = s.beta2;
      hyper["eps"] = s.eps;
      buffers["m"] = s.m.values();
      buffers["v"] = s.v.values();
      break;
    }
    case Algorithm::adafactor: {
      const auto& s = std::get<AdafactorState>(st_);
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const auto& gm : s.groups) {
        nlohmann::ordered_json gj;
        if (!gm.full.empty()) {
          gj["full"] = gm.full;
        } else {
          gj["row"] = gm.row;
          gj["col"] = gm.col;
        }
        arr.push_back(gj);
      }
      buffers["groups"] = arr;
      break;
    }
    case Algorithm::lion: {
      const auto& s = std::get<LionState>(st_);
      hyper["beta1"] = s.beta1;
      hyper["beta2"] = s.beta2;
      hyper["clip_pre_sign"] = s.clip_pre_sign;
      buffers["m"] = s.m.values();
      break;
    }
  }
  j["hyper"] = hyper;
  j["buffers"] = buffers;
  return j.dump(2);
}

namespace {

std::vector<double> load_buffer(const nlohmann::json& buffers, const char* key,
                                std::size_t expect) {
  if (!buffers.contains(key))
    throw config_error(std::string("checkpoint: missing buffer '") + key + "'");
  std::vector<double> v = buffers.at(key).get<std::vector<double>>();
  if (v.size() != expect)
    throw config_error(std::string("checkpoint: buffer '") + key +
                       "' has wrong length");
  return v;
}

}  // namespace

OptimizerState OptimizerState::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  jsonu::require_keys(j, "checkpoint",
                      {"format_version", "algorithm", "t", "layout", "hyper",
                       "buffers"});
  if (jsonu::get_uint(j, "checkpoint", "format_version") != 1)
    throw config_error("checkpoint.format_version: unsupported version");
  const Algorithm alg =
      parse_algorithm(jsonu::get_string(j, "checkpoint", "algorithm"));

  const nlohmann::json& lj = j.at("layout");
  if (!lj.is_array() || lj.empty())
    throw config_error("checkpoint.layout: expected a non-empty array");
  std::vector<Group> groups;
  for (const nlohmann::json& gj : lj) {
    jsonu::require_keys(gj, "checkpoint.layout", {"name", "rows", "cols"});
    Group g;
    g.name = jsonu::get_string(gj, "checkpoint.layout", "name");
    g.rows = static_cast<std::size_t>(jsonu::get_uint(gj, "checkpoint.layout", "rows"));
    g.cols = static_cast<std::size_t>(jsonu::get_uint(gj, "checkpoint.layout", "cols"));
    groups.push_back(std::move(g));
  }
  GroupLayout layout(groups);

  const nlohmann::json& hyper = j.at("hyper");
  Hyperparams hp;
  switch (alg) {
    case Algorithm::sgd:
    case Algorithm::normalized_sgd:
    case Algorithm::sign_sgd:
      jsonu::require_keys(hyper, "checkpoint.hyper", {"beta"});
      hp.sgd_beta = jsonu::get_number(hyper, "checkpoint.hyper", "beta");
      break;
    case Algorithm::adam:
      jsonu::require_keys(hyper, "checkpoint.hyper", {"beta1", "beta2", "eps"});
      hp.adam_beta1 = jsonu::get_number(hyper, "checkpoint.hyper", "beta1");
      hp.adam_beta2 = jsonu::get_number(hyper, "checkpoint.hyper", "beta2");
      hp.adam_eps = jsonu::get_number(hyper, "checkpoint.hyper", "eps");
      break;
    case Algorithm::adafactor:
      jsonu::require_keys(hyper, "checkpoint.hyper", {});
      break;
    case Algorithm::lion:
      jsonu::require_keys(hyper, "checkpoint.hyper",
                          {"beta1", "beta2", "clip_pre_sign"});
      hp.lion_beta1 = jsonu::get_number(hyper, "checkpoint.hyper", "beta1");
      hp.lion_beta2 = jsonu::get_number(hyper, "checkpoint.hyper", "beta2");
      hp.lion_clip_pre_sign =
          jsonu::get_bool_or(hyper, "checkpoint.hyper", "clip_pre_sign", false);
      break;
  }

  OptimizerState st = make(alg, layout, hp);
  st.t_ = jsonu::get_uint(j, "checkpoint", "t");

  const nlohmann::json& buffers = j.at("buffers");
  const std::size_t d = layout.dim();
  switch (alg) {
    case Algorithm::sgd:
    case Algorithm::normalized_sgd:
    case Algorithm::sign_sgd:
      std::get<SgdMomentumState>(st.st_).m =
          ParamVector(load_buffer(buffers, "m", d));
      break;
    case Algorithm::adam:
      std::get<AdamState>(st.st_).m = ParamVector(load_buffer(buffers, "m", d));
      std::get<AdamState>(st.st_).v = ParamVector(load_buffer(buffers, "v", d));
      break;
    case Algorithm::adafactor: {
      auto& s = std::get<AdafactorState>(st.st_);
      if (!buffers.contains("groups") || !buffers.at("groups").is_array() ||
          buffers.at("groups").size() != layout.group_count())
        throw config_error("checkpoint.buffers.groups: wrong group count");
      for (std::size_t gi = 0; gi < layout.group_count(); ++gi) {
        const nlohmann::json& gj = buffers.at("groups").at(gi);
        const Group& grp = layout.group(gi);
        if (grp.is_matrix()) {
          s.groups[gi].row = load_buffer(gj, "row", grp.rows);
          s.groups[gi].col = load_buffer(gj, "col", grp.cols);
        } else {
          s.groups[gi].full = load_buffer(gj, "full", grp.rows);
        }
      }
      break;
    }
    case Algorithm::lion:
      std::get<LionState>(st.st_).m = ParamVector(load_buffer(buffers, "m", d));
      break;
  }
  return st;
}

ParamVector candidate_update(OptimizerState& state, const ParamVector& g,
                             const ClipSpec& clip) {
  return state.step(g, clip);
}

ParamVector normalized_sgd_update(OptimizerState& state, const ParamVector& g,
                                  const ClipSpec& clip) {
  if (state.algorithm() != Algorithm::normalized_sgd)
    throw contract_error("normalized_sgd_update: state has wrong algorithm");
  return state.step(g, clip);
}

ParamVector apply_update(const ParamVector& x, const ParamVector& u, double eta) {
  if (x.size() != u.size())
    throw contract_error("apply_update: dimension mismatch");
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw contract_error("apply_update: eta must be positive and finite");
  return axpby(1.0, x, -eta, u);
}

ParamVector adafactor_step(OptimizerState& state, const ParamVector& x,
                           const ParamVector& g, const ClipSpec& clip,
                           std::optional<double> lr_override) {
  if (state.algorithm() != Algorithm::adafactor)
    throw contract_error("adafactor_step: state has wrong algorithm");
  if (x.size() != state.dim())
    throw contract_error("adafactor_step: parameter dimension mismatch");
  ParamVector u = state.step(g, clip);
  const double rho =
      std::min(1e-2, 1.0 / std::sqrt(static_cast<double>(state.step_count())));
  ParamVector delta = ParamVector::zeros(u.size());
  const GroupLayout& layout = state.layout();
  for (std::size_t gi = 0; gi < layout.group_count(); ++gi) {
    const std::size_t o = layout.offset(gi);
    const std::size_t n = layout.group(gi).size();
    const double alpha =
        lr_override.has_value()
            ? *lr_override
            : std::max(kAdafactorEps2, rms(x.data() + o, n)) * rho;
    kern::ops().scale(alpha, u.data() + o, delta.data() + o, n);
  }
  return delta;
}

void save_checkpoint(const OptimizerState& state, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw contract_error("checkpoint: cannot open '" + path + "' for writing");
  out << state.to_json() << "\n";
  if (!out) throw contract_error("checkpoint: write failed for '" + path + "'");
}

OptimizerState load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw contract_error("checkpoint: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return OptimizerState::from_json(ss.str());
}

}  // namespace optprobe
