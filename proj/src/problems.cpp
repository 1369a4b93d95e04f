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

#include "optprobe/problems.hpp"

#include <cmath>
#include <cstring>

#include "optprobe/errors.hpp"
#include "optprobe/json_util.hpp"
#include "optprobe/kernels.hpp"
#include "optprobe/problem_json.hpp"
#include "optprobe/rng.hpp"

namespace optprobe {

DiagQuadratic::DiagQuadratic(std::vector<double> diag) : diag_(std::move(diag)) {
  if (diag_.empty()) throw contract_error("quadratic: empty diagonal");
  for (double a : diag_)
    if (!(a > 0.0) || !std::isfinite(a))
      throw contract_error("quadratic: diagonal entries must be positive");
}

double DiagQuadratic::value(const ParamVector& x) const {
  return kern::ops().weighted_sum_sq(diag_.data(), x.data(), x.size());
}

ParamVector DiagQuadratic::gradient(const ParamVector& x) const {
  ParamVector g = ParamVector::zeros(x.size());
  kern::ops().scaled_mul(2.0, diag_.data(), x.data(), g.data(), x.size());
  return g;
}

ParamVector DiagQuadratic::hvp(const ParamVector&, const ParamVector& v) const {
  ParamVector r = ParamVector::zeros(v.size());
  kern::ops().scaled_mul(2.0, diag_.data(), v.data(), r.data(), v.size());
  return r;
}

double DiagQuadratic::hessian_spectral_norm() const {
  double m = 0.0;
  for (double a : diag_) m = std::max(m, a);
  return 2.0 * m;
}

namespace {

std::vector<double> theorem_diag(std::size_t dim, double eps, double l_bad,
                                 double ell_good, std::size_t* bad_count_out) {
  if (dim < 2) throw contract_error("theorem_instance: dim must be at least 2");
  if (!(eps > 0.0) || !(eps < 1.0))
    throw contract_error("theorem_instance: eps must lie in (0, 1)");
  if (!(ell_good > 0.0) || !(l_bad > ell_good))
    throw contract_error("theorem_instance: need l_bad > ell_good > 0");
  const std::size_t bad =
      static_cast<std::size_t>(std::ceil(eps * static_cast<double>(dim)));
  if (bad >= dim)
    throw contract_error("theorem_instance: eps leaves no well-conditioned coordinates");
  std::vector<double> diag(dim, ell_good / 2.0);
  for (std::size_t i = 0; i < bad; ++i) diag[i] = l_bad / 2.0;
  *bad_count_out = bad;
  return diag;
}

}  // namespace

TheoremInstance::TheoremInstance(std::size_t dim, double eps, double l_bad,
                                 double ell_good, std::uint64_t seed)
    : DiagQuadratic(theorem_diag(dim, eps, l_bad, ell_good, &bad_count_)),
      eps_(eps),
      l_bad_(l_bad),
      ell_good_(ell_good),
      seed_(seed) {}

ParamVector TheoremInstance::start_point() const {
  Rng rng(derive_seed(seed_, 0));
  ParamVector x = ParamVector::zeros(dim());
  for (std::size_t i = 0; i < dim(); ++i)
    x[i] = rng.sign() * rng.uniform(0.75, 1.25);
  return x;
}

// ---------------------------------------------------------------------------
// MLP

namespace {

constexpr double kWeightScalePow = -0.5;  // init scale fan_in^(-1/2)

}  // namespace

struct MlpClassifier::Forward {
  std::vector<double> a1;
  std::vector<double> h1;
  double z[2];
  double p[2];
};

MlpClassifier::MlpClassifier(std::size_t input_dim, std::size_t hidden,
                             std::size_t samples, double separation,
                             std::uint64_t seed)
    : input_dim_(input_dim), hidden_(hidden), seed_(seed) {
  if (input_dim_ == 0 || hidden_ == 0)
    throw contract_error("mlp: input_dim and hidden must be positive");
  if (samples < 2) throw contract_error("mlp: need at least 2 samples");
  if (!(separation >= 0.0) || !std::isfinite(separation))
    throw contract_error("mlp: separation must be non-negative");

  dim_ = hidden_ * input_dim_ + hidden_ + 2 * hidden_ + 2;
  layout_ = GroupLayout({Group{"W1", hidden_, input_dim_},
                         Group{"b1", hidden_, 0},
                         Group{"W2", 2, hidden_},
                         Group{"b2", 2, 0}});

  // Two Gaussian clusters at +-separation/2 per coordinate, labels alternating.
  Rng data_rng(derive_seed(seed, 0));
  const double half = separation / 2.0;
  features_.resize(samples * input_dim_);
  labels_.resize(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const int y = static_cast<int>(i % 2);
    labels_[i] = y;
    const double center = y == 1 ? half : -half;
    for (std::size_t k = 0; k < input_dim_; ++k)
      features_[i * input_dim_ + k] = center + data_rng.gaussian();
  }

  Rng weight_rng(derive_seed(seed, 1));
  init_ = ParamVector::zeros(dim_);
  const double s1 = std::pow(static_cast<double>(input_dim_), kWeightScalePow);
  const double s2 = std::pow(static_cast<double>(hidden_), kWeightScalePow);
  for (std::size_t j = 0; j < hidden_ * input_dim_; ++j)
    init_[j] = s1 * weight_rng.gaussian();
  const std::size_t ow2 = hidden_ * input_dim_ + hidden_;
  for (std::size_t j = 0; j < 2 * hidden_; ++j)
    init_[ow2 + j] = s2 * weight_rng.gaussian();
}

MlpClassifier::Forward MlpClassifier::forward(const ParamVector& theta,
                                              std::size_t i) const {
  const std::size_t in = input_dim_;
  const std::size_t h = hidden_;
  const double* W1 = theta.data();
  const double* b1 = theta.data() + h * in;
  const double* W2 = b1 + h;
  const double* b2 = W2 + 2 * h;
  const double* x = features_.data() + i * in;

  Forward f;
  f.a1.resize(h);
  f.h1.resize(h);
  const auto& k = kern::ops();
  for (std::size_t j = 0; j < h; ++j) {
    f.a1[j] = k.dot(W1 + j * in, x, in) + b1[j];
    f.h1[j] = std::tanh(f.a1[j]);
  }
  for (int r = 0; r < 2; ++r) f.z[r] = k.dot(W2 + r * h, f.h1.data(), h) + b2[r];

  const double m = std::max(f.z[0], f.z[1]);
  const double e0 = std::exp(f.z[0] - m);
  const double e1 = std::exp(f.z[1] - m);
  const double sum = e0 + e1;
  f.p[0] = e0 / sum;
  f.p[1] = e1 / sum;
  return f;
}

double MlpClassifier::value(const ParamVector& theta) const {
  double total = 0.0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const Forward f = forward(theta, i);
    const double m = std::max(f.z[0], f.z[1]);
    const double lse =
        std::log(std::exp(f.z[0] - m) + std::exp(f.z[1] - m)) + m;
    total += lse - f.z[labels_[i]];
  }
  return total / static_cast<double>(labels_.size());
}

ParamVector MlpClassifier::gradient(const ParamVector& theta) const {
  const std::size_t in = input_dim_;
  const std::size_t h = hidden_;
  const double* W2 = theta.data() + h * in + h;

  ParamVector grad = ParamVector::zeros(dim_);
  double* gW1 = grad.data();
  double* gb1 = grad.data() + h * in;
  double* gW2 = gb1 + h;
  double* gb2 = gW2 + 2 * h;

  std::vector<double> da1(h);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const Forward f = forward(theta, i);
    const double* x = features_.data() + i * in;
    double dz[2] = {f.p[0], f.p[1]};
    dz[labels_[i]] -= 1.0;

    for (int r = 0; r < 2; ++r) {
      for (std::size_t j = 0; j < h; ++j) gW2[r * h + j] += dz[r] * f.h1[j];
      gb2[r] += dz[r];
    }
    for (std::size_t j = 0; j < h; ++j) {
      const double dh1 = W2[j] * dz[0] + W2[h + j] * dz[1];
      da1[j] = (1.0 - f.h1[j] * f.h1[j]) * dh1;
      for (std::size_t k2 = 0; k2 < in; ++k2) gW1[j * in + k2] += da1[j] * x[k2];
      gb1[j] += da1[j];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(labels_.size());
  kern::ops().scale(inv_n, grad.data(), grad.data(), dim_);
  return grad;
}

// Forward-over-reverse: differentiate the gradient along v in one pass, so the
// product is exact rather than a finite difference.
ParamVector MlpClassifier::hvp(const ParamVector& theta, const ParamVector& v) const {
  const std::size_t in = input_dim_;
  const std::size_t h = hidden_;
  const double* W2 = theta.data() + h * in + h;
  const double* vW1 = v.data();
  const double* vb1 = v.data() + h * in;
  const double* vW2 = vb1 + h;
  const double* vb2 = vW2 + 2 * h;

  ParamVector out = ParamVector::zeros(dim_);
  double* oW1 = out.data();
  double* ob1 = out.data() + h * in;
  double* oW2 = ob1 + h;
  double* ob2 = oW2 + 2 * h;

  const auto& k = kern::ops();
  std::vector<double> ra1(h), rh1(h), dh1(h), rdh1(h);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const Forward f = forward(theta, i);
    const double* x = features_.data() + i * in;
    double dz[2] = {f.p[0], f.p[1]};
    dz[labels_[i]] -= 1.0;

    for (std::size_t j = 0; j < h; ++j) {
      ra1[j] = k.dot(vW1 + j * in, x, in) + vb1[j];
      rh1[j] = (1.0 - f.h1[j] * f.h1[j]) * ra1[j];
    }
    double rz[2];
    for (int r = 0; r < 2; ++r)
      rz[r] = k.dot(vW2 + r * h, f.h1.data(), h) +
              k.dot(W2 + r * h, rh1.data(), h) + vb2[r];

    // d(softmax)/dz applied to rz
    const double pdot = f.p[0] * rz[0] + f.p[1] * rz[1];
    const double rdz[2] = {f.p[0] * (rz[0] - pdot), f.p[1] * (rz[1] - pdot)};

    for (int r = 0; r < 2; ++r) {
      for (std::size_t j = 0; j < h; ++j)
        oW2[r * h + j] += rdz[r] * f.h1[j] + dz[r] * rh1[j];
      ob2[r] += rdz[r];
    }
    for (std::size_t j = 0; j < h; ++j) {
      dh1[j] = W2[j] * dz[0] + W2[h + j] * dz[1];
      rdh1[j] = vW2[j] * dz[0] + vW2[h + j] * dz[1] + W2[j] * rdz[0] +
                W2[h + j] * rdz[1];
      const double s = 1.0 - f.h1[j] * f.h1[j];
      const double rda1 = -2.0 * f.h1[j] * rh1[j] * dh1[j] + s * rdh1[j];
      for (std::size_t k2 = 0; k2 < in; ++k2) oW1[j * in + k2] += rda1 * x[k2];
      ob1[j] += rda1;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(labels_.size());
  k.scale(inv_n, out.data(), out.data(), dim_);
  return out;
}

std::array<double, 2> MlpClassifier::logits(const ParamVector& theta,
                                            std::size_t i) const {
  if (theta.size() != dim_) throw contract_error("mlp: theta dimension mismatch");
  if (i >= labels_.size()) throw contract_error("mlp: sample index out of range");
  const Forward f = forward(theta, i);
  return {f.z[0], f.z[1]};
}

ParamVector MlpClassifier::logit_vjp(const ParamVector& theta, std::size_t i,
                                     double w0, double w1) const {
  if (theta.size() != dim_) throw contract_error("mlp: theta dimension mismatch");
  if (i >= labels_.size()) throw contract_error("mlp: sample index out of range");
  const std::size_t in = input_dim_;
  const std::size_t h = hidden_;
  const double* W2 = theta.data() + h * in + h;
  const double* x = features_.data() + i * in;

  const Forward f = forward(theta, i);
  ParamVector out = ParamVector::zeros(dim_);
  double* oW1 = out.data();
  double* ob1 = out.data() + h * in;
  double* oW2 = ob1 + h;
  double* ob2 = oW2 + 2 * h;

  const double w[2] = {w0, w1};
  for (int r = 0; r < 2; ++r) {
    for (std::size_t j = 0; j < h; ++j) oW2[r * h + j] = w[r] * f.h1[j];
    ob2[r] = w[r];
  }
  for (std::size_t j = 0; j < h; ++j) {
    const double dh1 = W2[j] * w0 + W2[h + j] * w1;
    const double da1 = (1.0 - f.h1[j] * f.h1[j]) * dh1;
    for (std::size_t k2 = 0; k2 < in; ++k2) oW1[j * in + k2] = da1 * x[k2];
    ob1[j] = da1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Factories and the serializable spec

std::shared_ptr<DiagQuadratic> make_intro_quadratic(std::size_t dim) {
  if (dim < 2) throw contract_error("intro_quadratic: dim must be at least 2");
  std::vector<double> diag(dim, 1.0);
  diag[0] = 100.0;
  return std::make_shared<DiagQuadratic>(std::move(diag));
}

std::shared_ptr<DiagQuadratic> make_diag_quadratic(std::vector<double> diag) {
  return std::make_shared<DiagQuadratic>(std::move(diag));
}

std::shared_ptr<TheoremInstance> make_theorem_instance(std::size_t dim, double eps,
                                                       double l_bad, double ell_good,
                                                       std::uint64_t seed) {
  return std::make_shared<TheoremInstance>(dim, eps, l_bad, ell_good, seed);
}

std::shared_ptr<MlpClassifier> make_mlp(std::size_t input_dim, std::size_t hidden,
                                        std::size_t samples, double separation,
                                        std::uint64_t seed) {
  return std::make_shared<MlpClassifier>(input_dim, hidden, samples, separation,
                                         seed);
}

std::string ProblemSpec::to_json() const {
  nlohmann::json j;
  switch (kind) {
    case Kind::intro_quadratic:
      j["type"] = "intro_quadratic";
      j["dim"] = dim;
      break;
    case Kind::diag_quadratic:
      j["type"] = "diag_quadratic";
      j["diag"] = diag;
      break;
    case Kind::theorem:
      j["type"] = "theorem";
      j["dim"] = dim;
      j["eps"] = eps;
      j["l_bad"] = l_bad;
      j["ell_good"] = ell_good;
      j["seed"] = seed;
      break;
    case Kind::mlp:
      j["type"] = "mlp";
      j["input_dim"] = input_dim;
      j["hidden"] = hidden;
      j["samples"] = samples;
      j["separation"] = separation;
      j["seed"] = seed;
      break;
  }
  return j.dump();
}

ProblemSpec ProblemSpec::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(std::string("problem spec: invalid JSON: ") + e.what());
  }
  return parse_problem_spec(j, "");
}

ProblemSpec parse_problem_spec(const nlohmann::json& j, const std::string& path) {
  namespace ju = jsonu;
  ju::require_object(j, path.empty() ? "problem" : path);
  const std::string type = ju::get_string(j, path, "type");
  ProblemSpec spec;
  if (type == "intro_quadratic") {
    ju::require_keys(j, path, {"type", "dim"});
    spec.kind = ProblemSpec::Kind::intro_quadratic;
    spec.dim = static_cast<std::size_t>(ju::get_uint_or(j, path, "dim", 10));
  } else if (type == "diag_quadratic") {
    ju::require_keys(j, path, {"type", "diag"});
    spec.kind = ProblemSpec::Kind::diag_quadratic;
    spec.diag = ju::get_number_array(j, path, "diag");
  } else if (type == "theorem") {
    ju::require_keys(j, path, {"type", "dim", "eps", "l_bad", "ell_good", "seed"});
    spec.kind = ProblemSpec::Kind::theorem;
    spec.dim = static_cast<std::size_t>(ju::get_uint_or(j, path, "dim", 100));
    spec.eps = ju::get_number_or(j, path, "eps", 0.02);
    spec.l_bad = ju::get_number_or(j, path, "l_bad", 200.0);
    spec.ell_good = ju::get_number_or(j, path, "ell_good", 2.0);
    spec.seed = ju::get_uint_or(j, path, "seed", 0);
    spec.seed_explicit = ju::has(j, "seed");
  } else if (type == "mlp") {
    ju::require_keys(j, path,
                     {"type", "input_dim", "hidden", "samples", "separation", "seed"});
    spec.kind = ProblemSpec::Kind::mlp;
    spec.input_dim = static_cast<std::size_t>(ju::get_uint_or(j, path, "input_dim", 4));
    spec.hidden = static_cast<std::size_t>(ju::get_uint_or(j, path, "hidden", 8));
    spec.samples = static_cast<std::size_t>(ju::get_uint_or(j, path, "samples", 64));
    spec.separation = ju::get_number_or(j, path, "separation", 2.0);
    spec.seed = ju::get_uint_or(j, path, "seed", 0);
    spec.seed_explicit = ju::has(j, "seed");
  } else {
    throw config_error(jsonu::join(path, "type") + ": unknown problem type '" +
                       type + "'");
  }
  return spec;
}

std::shared_ptr<Objective> make_problem(const ProblemSpec& spec) {
  switch (spec.kind) {
    case ProblemSpec::Kind::intro_quadratic:
      return make_intro_quadratic(spec.dim);
    case ProblemSpec::Kind::diag_quadratic:
      return make_diag_quadratic(spec.diag);
    case ProblemSpec::Kind::theorem:
      return make_theorem_instance(spec.dim, spec.eps, spec.l_bad, spec.ell_good,
                                   spec.seed);
    case ProblemSpec::Kind::mlp:
      return make_mlp(spec.input_dim, spec.hidden, spec.samples, spec.separation,
                      spec.seed);
  }
  throw contract_error("make_problem: unknown kind");
}

GroupLayout problem_layout(const Objective& f) {
  if (const auto* mlp = dynamic_cast<const MlpClassifier*>(&f))
    return mlp->layout();
  return GroupLayout::single_vector(f.dim());
}

ParamVector default_start(const Objective& f) {
  if (const auto* thm = dynamic_cast<const TheoremInstance*>(&f))
    return thm->start_point();
  if (const auto* mlp = dynamic_cast<const MlpClassifier*>(&f))
    return mlp->initial_weights();
  return ParamVector::constant(f.dim(), 1.0);
}

}  // namespace optprobe
