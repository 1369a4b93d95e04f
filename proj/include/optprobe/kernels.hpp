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

#include <cstddef>
#include <string>
#include <vector>

namespace optprobe::kern {

// Flat-array kernels behind every hot loop.  Two implementations exist: a
// scalar reference and an AVX2 variant selected at runtime.  Elementwise
// kernels are bit-exact across implementations (same per-element operation
// order, no FMA contraction); reductions may differ in association order and
// are only equivalent up to rounding.
struct Ops {
  const char* name;

  // Reductions.
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*sum_sq)(const double* x, std::size_t n);
  // sum_i w[i] * x[i]^2
  double (*weighted_sum_sq)(const double* w, const double* x, std::size_t n);
  // sum_i (x[i]^2 + shift)
  double (*sum_sq_shift)(const double* x, double shift, std::size_t n);
  // max_i |x[i]|; 0 for n == 0
  double (*abs_max)(const double* x, std::size_t n);

  // Elementwise maps.  out may alias x (and y where present).
  // out[i] = a * x[i]
  void (*scale)(double a, const double* x, double* out, std::size_t n);
  // out[i] = a * x[i] + b * y[i]
  void (*axpby)(double a, const double* x, double b, const double* y,
                double* out, std::size_t n);
  // out[i] = a * x[i] * y[i]
  void (*scaled_mul)(double a, const double* x, const double* y, double* out,
                     std::size_t n);
  // m[i] = beta * m[i] + (1 - beta) * g[i]
  void (*ema)(double beta, double* m, const double* g, std::size_t n);
  // v[i] = beta * v[i] + (1 - beta) * (g[i]^2 + shift)
  void (*ema_sq_shift)(double beta, double* v, const double* g, double shift,
                       std::size_t n);
  // acc[i] += w * (g[i]^2 + shift)
  void (*acc_sq_shift)(double w, const double* g, double shift, double* acc,
                       std::size_t n);
  // out[i] = m[i] / sqrt(v[i] + eps)
  void (*adam_dir)(const double* m, const double* v, double eps, double* out,
                   std::size_t n);
  // out[i] = num[i] / sqrt(den[i])
  void (*div_sqrt)(const double* num, const double* den, double* out,
                   std::size_t n);
  // out[i] = sign(g[i]) * min(|g[i]|, tau); returns count of |g[i]| > tau
  std::size_t (*clip_apply)(const double* g, double tau, double* out,
                            std::size_t n);
  // out[i] = -1, 0, +1 by sign of x[i]
  void (*sign)(const double* x, double* out, std::size_t n);
};

enum class Isa { scalar, avx2 };

std::string isa_name(Isa isa);

bool available(Isa isa);
Isa best_available();
std::vector<Isa> all_available();

// Active implementation.  Defaults to best_available() on first use; select()
// throws unsupported_error if the requested ISA cannot run on this CPU.
const Ops& ops();
Isa active();
void select(Isa isa);

const Ops& scalar_ops();
#ifdef OPTPROBE_HAVE_AVX2
const Ops& avx2_ops();
#endif

}  // namespace optprobe::kern
