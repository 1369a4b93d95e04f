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

#include "optprobe/kernels.hpp"

#include <atomic>
#include <cmath>

#include "optprobe/errors.hpp"

namespace optprobe::kern {
namespace {

double s_dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double s_sum_sq(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double s_weighted_sum_sq(const double* w, const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * (x[i] * x[i]);
  return acc;
}

double s_sum_sq_shift(const double* x, double shift, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i] + shift;
  return acc;
}

double s_abs_max(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

void s_scale(double a, const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i];
}

void s_axpby(double a, const double* x, double b, const double* y, double* out,
             std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void s_scaled_mul(double a, const double* x, const double* y, double* out,
                  std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * (x[i] * y[i]);
}

void s_ema(double beta, double* m, const double* g, std::size_t n) {
  const double omb = 1.0 - beta;
  for (std::size_t i = 0; i < n; ++i) m[i] = beta * m[i] + omb * g[i];
}

void s_ema_sq_shift(double beta, double* v, const double* g, double shift,
                    std::size_t n) {
  const double omb = 1.0 - beta;
  for (std::size_t i = 0; i < n; ++i)
    v[i] = beta * v[i] + omb * (g[i] * g[i] + shift);
}

void s_acc_sq_shift(double w, const double* g, double shift, double* acc,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] = acc[i] + w * (g[i] * g[i] + shift);
}

void s_adam_dir(const double* m, const double* v, double eps, double* out,
                std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = m[i] / std::sqrt(v[i] + eps);
}

void s_div_sqrt(const double* num, const double* den, double* out,
                std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = num[i] / std::sqrt(den[i]);
}

std::size_t s_clip_apply(const double* g, double tau, double* out,
                         std::size_t n) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::fabs(g[i]);
    const double c = a > tau ? tau : a;
    out[i] = std::copysign(c, g[i]);
    count += a > tau;
  }
  return count;
}

void s_sign(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = static_cast<double>((x[i] > 0.0) - (x[i] < 0.0));
}

const Ops kScalarOps = {
    "scalar",        s_dot,        s_sum_sq,   s_weighted_sum_sq,
    s_sum_sq_shift,  s_abs_max,    s_scale,    s_axpby,
    s_scaled_mul,    s_ema,        s_ema_sq_shift, s_acc_sq_shift,
    s_adam_dir,      s_div_sqrt,   s_clip_apply,   s_sign,
};

std::atomic<const Ops*> g_active{nullptr};

const Ops* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &kScalarOps;
    case Isa::avx2:
#ifdef OPTPROBE_HAVE_AVX2
      return &avx2_ops();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(OPTPROBE_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
      return __builtin_cpu_supports("avx2") != 0;
#else
      return false;
#endif
  }
  return false;
}

}  // namespace

std::string isa_name(Isa isa) {
  return isa == Isa::scalar ? "scalar" : "avx2";
}

bool available(Isa isa) { return table_for(isa) != nullptr && cpu_supports(isa); }

Isa best_available() {
  return available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::vector<Isa> all_available() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::scalar, Isa::avx2})
    if (available(isa)) out.push_back(isa);
  return out;
}

const Ops& scalar_ops() { return kScalarOps; }

const Ops& ops() {
  const Ops* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    t = table_for(best_available());
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

Isa active() {
  return &ops() == &kScalarOps ? Isa::scalar : Isa::avx2;
}

void select(Isa isa) {
  if (!available(isa))
    throw unsupported_error("kernel ISA not available on this host: " +
                            isa_name(isa));
  g_active.store(table_for(isa), std::memory_order_release);
}

}  // namespace optprobe::kern
