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

// AVX2 kernel variants.  This translation unit is compiled with -mavx2 and
// -ffp-contract=off; elementwise kernels keep the exact per-element operation
// order of the scalar reference so results are bit-identical.  Reductions use
// vector accumulators and therefore differ from scalar only by association
// order.  Nothing here runs unless dispatch selected the table.

#include <immintrin.h>

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>

#include "optprobe/kernels.hpp"

namespace optprobe::kern {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sw = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sw));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d sw = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, sw));
}

inline __m256d abs_pd(__m256d v) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  return _mm256_and_pd(v, mask);
}

inline __m256d sign_bits(__m256d v) {
  const __m256d mask =
      _mm256_castsi256_pd(_mm256_set1_epi64x(static_cast<long long>(0x8000000000000000ULL)));
  return _mm256_and_pd(v, mask);
}

double v_dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double v_sum_sq(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

double v_weighted_sum_sq(const double* w, const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_mul_pd(v, v)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * (x[i] * x[i]);
  return s;
}

double v_sum_sq_shift(const double* x, double shift, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(shift);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_add_pd(acc, _mm256_add_pd(_mm256_mul_pd(v, v), vs));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * x[i] + shift;
  return s;
}

double v_abs_max(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, abs_pd(_mm256_loadu_pd(x + i)));
  double m = hmax(acc);
  for (; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

void v_scale(double a, const double* x, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = a * x[i];
}

void v_axpby(double a, const double* x, double b, const double* y, double* out,
             std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + i)),
                              _mm256_mul_pd(vb, _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(out + i, t);
  }
  for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void v_scaled_mul(double a, const double* x, const double* y, double* out,
                  std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_mul_pd(va, _mm256_mul_pd(_mm256_loadu_pd(x + i),
                                                _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(out + i, t);
  }
  for (; i < n; ++i) out[i] = a * (x[i] * y[i]);
}

void v_ema(double beta, double* m, const double* g, std::size_t n) {
  const double omb = 1.0 - beta;
  const __m256d vb = _mm256_set1_pd(beta);
  const __m256d vo = _mm256_set1_pd(omb);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_add_pd(_mm256_mul_pd(vb, _mm256_loadu_pd(m + i)),
                              _mm256_mul_pd(vo, _mm256_loadu_pd(g + i)));
    _mm256_storeu_pd(m + i, t);
  }
  for (; i < n; ++i) m[i] = beta * m[i] + omb * g[i];
}

void v_ema_sq_shift(double beta, double* v, const double* g, double shift,
                    std::size_t n) {
  const double omb = 1.0 - beta;
  const __m256d vb = _mm256_set1_pd(beta);
  const __m256d vo = _mm256_set1_pd(omb);
  const __m256d vs = _mm256_set1_pd(shift);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d gg = _mm256_loadu_pd(g + i);
    __m256d t = _mm256_add_pd(
        _mm256_mul_pd(vb, _mm256_loadu_pd(v + i)),
        _mm256_mul_pd(vo, _mm256_add_pd(_mm256_mul_pd(gg, gg), vs)));
    _mm256_storeu_pd(v + i, t);
  }
  for (; i < n; ++i) v[i] = beta * v[i] + omb * (g[i] * g[i] + shift);
}

void v_acc_sq_shift(double w, const double* g, double shift, double* acc,
                    std::size_t n) {
  const __m256d vw = _mm256_set1_pd(w);
  const __m256d vs = _mm256_set1_pd(shift);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d gg = _mm256_loadu_pd(g + i);
    __m256d t = _mm256_add_pd(
        _mm256_loadu_pd(acc + i),
        _mm256_mul_pd(vw, _mm256_add_pd(_mm256_mul_pd(gg, gg), vs)));
    _mm256_storeu_pd(acc + i, t);
  }
  for (; i < n; ++i) acc[i] = acc[i] + w * (g[i] * g[i] + shift);
}

void v_adam_dir(const double* m, const double* v, double eps, double* out,
                std::size_t n) {
  const __m256d ve = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_div_pd(
        _mm256_loadu_pd(m + i),
        _mm256_sqrt_pd(_mm256_add_pd(_mm256_loadu_pd(v + i), ve)));
    _mm256_storeu_pd(out + i, t);
  }
  for (; i < n; ++i) out[i] = m[i] / std::sqrt(v[i] + eps);
}

void v_div_sqrt(const double* num, const double* den, double* out,
                std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_div_pd(_mm256_loadu_pd(num + i),
                              _mm256_sqrt_pd(_mm256_loadu_pd(den + i)));
    _mm256_storeu_pd(out + i, t);
  }
  for (; i < n; ++i) out[i] = num[i] / std::sqrt(den[i]);
}

std::size_t v_clip_apply(const double* g, double tau, double* out,
                         std::size_t n) {
  const __m256d vt = _mm256_set1_pd(tau);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d gg = _mm256_loadu_pd(g + i);
    __m256d a = abs_pd(gg);
    __m256d clipped = _mm256_min_pd(a, vt);
    _mm256_storeu_pd(out + i, _mm256_or_pd(clipped, sign_bits(gg)));
    __m256d gt = _mm256_cmp_pd(a, vt, _CMP_GT_OQ);
    count += static_cast<std::size_t>(std::popcount(
        static_cast<unsigned>(_mm256_movemask_pd(gt))));
  }
  for (; i < n; ++i) {
    const double a = std::fabs(g[i]);
    const double c = a > tau ? tau : a;
    out[i] = std::copysign(c, g[i]);
    count += a > tau;
  }
  return count;
}

void v_sign(const double* x, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d pos = _mm256_set1_pd(1.0);
  const __m256d neg = _mm256_set1_pd(-1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    __m256d gt = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
    __m256d lt = _mm256_cmp_pd(v, zero, _CMP_LT_OQ);
    _mm256_storeu_pd(out + i,
                     _mm256_or_pd(_mm256_and_pd(gt, pos), _mm256_and_pd(lt, neg)));
  }
  for (; i < n; ++i)
    out[i] = static_cast<double>((x[i] > 0.0) - (x[i] < 0.0));
}

const Ops kAvx2Ops = {
    "avx2",          v_dot,        v_sum_sq,   v_weighted_sum_sq,
    v_sum_sq_shift,  v_abs_max,    v_scale,    v_axpby,
    v_scaled_mul,    v_ema,        v_ema_sq_shift, v_acc_sq_shift,
    v_adam_dir,      v_div_sqrt,   v_clip_apply,   v_sign,
};

}  // namespace

const Ops& avx2_ops() { return kAvx2Ops; }

}  // namespace optprobe::kern
