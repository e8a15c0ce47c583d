#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's root finders or scale-function code.

#include "snlevy/levy_model.hpp"

#include <cmath>
#include <vector>

namespace oracle {

inline snlevy::LevyModel b1() { return snlevy::LevyModel(-1.0, 1.0); }
inline snlevy::LevyModel j1() { return snlevy::LevyModel(-0.5, 1.0, {{0.5, 2.0}}); }

// Reference values for J1 from 30-digit arithmetic (mpmath).
inline constexpr double kJ1LambdaStar = 0.64313959937424421789;
inline constexpr double kJ1QStar = 0.23641758420086075174;
inline constexpr double kJ1PhiMinus = 0.43743658570246277276;  // at beta = 0.9 q*
inline constexpr double kJ1PhiPlus = 0.85042700975906168191;
inline constexpr double kJ1ChiBeta = 1.0231024217473435106;
inline constexpr double kJ1ChiCritical = 1.0314256004143673476;

// Brownian motion with drift -1, sigma^2 = 1: psi(l) = l^2/2 - l.
// Roots of psi = q are 1 +- sqrt(1 + 2q).
inline double b1_w(double q, double x) {
  if (x < 0.0) return 0.0;
  const double s = std::sqrt(1.0 + 2.0 * q);
  if (s == 0.0) return 2.0 * x * std::exp(x);
  return (std::exp((1.0 + s) * x) - std::exp((1.0 - s) * x)) / s;
}

// Z^(q)(x) = 1 + q int_0^x W^(q)
inline double b1_z(double q, double x) {
  if (x <= 0.0) return 1.0;
  const double s = std::sqrt(1.0 + 2.0 * q);
  if (s == 0.0) return 1.0 + q * 2.0 * ((x - 1.0) * std::exp(x) + 1.0);
  const double rp = 1.0 + s, rm = 1.0 - s;
  const double ip = std::expm1(rp * x) / rp;
  const double im = rm == 0.0 ? x : std::expm1(rm * x) / rm;
  return 1.0 + q * (ip - im) / s;
}

// Solves A u = r for tridiagonal A (lower l, diagonal d, upper u), in place.
inline std::vector<double> thomas(std::vector<double> l, std::vector<double> d, std::vector<double> u,
                                  std::vector<double> r) {
  const std::size_t n = d.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = l[i] / d[i - 1];
    d[i] -= m * u[i - 1];
    r[i] -= m * r[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = r[n - 1] / d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (r[i] - u[i] * x[i + 1]) / d[i];
  return x;
}

// P_a(M >= x) for branching Brownian motion with drift d, variance s2, rate beta,
// killed at 0: 1 - u(a) where s2/2 u'' + d u' + beta (u^2 - u) = 0, u(0) = 1,
// u(x) = 0. Newton iterations on a finite-difference grid of step h
// (a and x must be multiples of h).
inline double bbm_max_tail(double d, double s2, double beta, double a, double x, double h = 5e-4) {
  const auto n = static_cast<std::size_t>(std::lround(x / h));
  std::vector<double> v(n + 1);
  for (std::size_t i = 0; i <= n; ++i) v[i] = 1.0 - static_cast<double>(i) / static_cast<double>(n);
  const double lo = 0.5 * s2 / (h * h) - d / (2.0 * h);
  const double up = 0.5 * s2 / (h * h) + d / (2.0 * h);
  for (int it = 0; it < 50; ++it) {
    const std::size_t m = n - 1;
    std::vector<double> L(m, lo), D(m), U(m, up), F(m);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = k + 1;
      F[k] = lo * v[i - 1] + up * v[i + 1] - s2 / (h * h) * v[i] + beta * (v[i] * v[i] - v[i]);
      D[k] = -s2 / (h * h) + beta * (2.0 * v[i] - 1.0);
      F[k] = -F[k];
    }
    const auto dv = thomas(L, D, U, F);
    double change = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      v[k + 1] += dv[k];
      change = std::max(change, std::abs(dv[k]));
    }
    if (change < 1e-13) break;
  }
  return 1.0 - v[static_cast<std::size_t>(std::lround(a / h))];
}

// P_a(Z_0 >= n) for n = 1..n_max under branching Brownian motion (drift d,
// variance s2, rate beta) from the generating-function hierarchy
//   s2/2 g_n'' + d g_n' - beta g_n = -beta sum_{k=1}^{n-1} g_k g_{n-k},
// g_1(0) = 1, g_n(0) = 0 for n >= 2, g_n(A) = 0, with g_n(a) = P_a(Z_0 = n).
inline std::vector<double> bbm_progeny_tail(double d, double s2, double beta, double a, int n_max,
                                            double h = 0.01, double horizon = 40.0) {
  const auto m = static_cast<std::size_t>(std::lround(horizon / h)) - 1;
  const double lo = 0.5 * s2 / (h * h) - d / (2.0 * h);
  const double up = 0.5 * s2 / (h * h) + d / (2.0 * h);
  const double dg = -s2 / (h * h) - beta;
  std::vector<std::vector<double>> g(static_cast<std::size_t>(n_max) + 1);
  for (int n = 1; n <= n_max; ++n) {
    std::vector<double> r(m, 0.0);
    if (n == 1) {
      r[0] = -lo;
    } else {
      for (std::size_t i = 0; i < m; ++i) {
        double conv = 0.0;
        for (int k = 1; k < n; ++k) conv += g[k][i] * g[n - k][i];
        r[i] = -beta * conv;
      }
    }
    g[n] = thomas(std::vector<double>(m, lo), std::vector<double>(m, dg), std::vector<double>(m, up), r);
  }
  const auto ia = static_cast<std::size_t>(std::lround(a / h)) - 1;
  std::vector<double> surv(static_cast<std::size_t>(n_max) + 1, 0.0);
  double cum = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    surv[n] = 1.0 - cum;
    cum += g[n][ia];
  }
  return surv;  // surv[n] = P(Z >= n), surv[0] unused
}

}  // namespace oracle
