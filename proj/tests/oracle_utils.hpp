// Test-side reference implementations, kept independent of the library code
// under test: finite differences for derivatives, a dense Jacobi eigensolver
// for spectra, and seeded random data helpers.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "optprobe/objective.hpp"
#include "optprobe/param_vector.hpp"
#include "optprobe/rng.hpp"

namespace oracle {

inline bool close_rel(double a, double b, double tol, double floor = 1.0) {
  const double scale = std::max({std::fabs(a), std::fabs(b), floor});
  return std::fabs(a - b) <= tol * scale;
}

// Central-difference gradient with per-coordinate step 1e-6 * (1 + |x_i|).
inline optprobe::ParamVector fd_gradient(const optprobe::Objective& f,
                                         const optprobe::ParamVector& x) {
  optprobe::ParamVector g = optprobe::ParamVector::zeros(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::fabs(x[i]));
    optprobe::ParamVector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f.value(xp) - f.value(xm)) / (2.0 * h);
  }
  return g;
}

// Hessian-vector product from the objective's own gradient; validates hvp()
// against gradient(), which the fd_gradient check ties to value().
inline optprobe::ParamVector fd_hvp(const optprobe::Objective& f,
                                    const optprobe::ParamVector& x,
                                    const optprobe::ParamVector& v,
                                    double h = 1e-6) {
  optprobe::ParamVector xp = x, xm = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] += h * v[i];
    xm[i] -= h * v[i];
  }
  const optprobe::ParamVector gp = f.gradient(xp);
  const optprobe::ParamVector gm = f.gradient(xm);
  optprobe::ParamVector out = optprobe::ParamVector::zeros(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = (gp[i] - gm[i]) / (2.0 * h);
  return out;
}

// Eigenvalues of a dense symmetric matrix (row-major, destructive copy) by
// cyclic Jacobi rotations.  Returns them sorted ascending.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> a,
                                              std::size_t n) {
  auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * n + c]; };
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::fabs(at(i, i)));
  scale = std::max(scale, 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += at(p, q) * at(p, q);
    if (std::sqrt(off) <= 1e-14 * n * scale) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double tau = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        at(p, p) -= t * apq;
        at(q, q) += t * apq;
        at(p, q) = 0.0;
        at(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = at(k, p);
          const double akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(p, k) = at(k, p);
          at(k, q) = s * akp + c * akq;
          at(q, k) = at(k, q);
        }
      }
    }
  }

  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

inline double max_eigenvalue(const std::vector<double>& a, std::size_t n) {
  return jacobi_eigenvalues(a, n).back();
}

inline optprobe::ParamVector random_vector(optprobe::Rng& rng, std::size_t n,
                                           double lo = -1.0, double hi = 1.0) {
  optprobe::ParamVector v = optprobe::ParamVector::zeros(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

inline optprobe::ParamVector random_gaussian(optprobe::Rng& rng, std::size_t n,
                                             double scale = 1.0) {
  optprobe::ParamVector v = optprobe::ParamVector::zeros(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = scale * rng.gaussian();
  return v;
}

}  // namespace oracle
