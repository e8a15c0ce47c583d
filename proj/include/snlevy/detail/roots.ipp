#pragma once

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <utility>

namespace snlevy::detail {

template <class F, class DF>
double solve_bracketed(F&& f, DF&& df, double lo, double hi) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  std::uintmax_t max_iter = 200;
  auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), max_iter);
  double x = 0.5 * (a + b);
  // Newton polish, kept only if it stays inside the final bracket and lowers |f|.
  for (int i = 0; i < 3; ++i) {
    double fx = f(x);
    double d = df(x);
    if (fx == 0.0 || !std::isfinite(d) || d == 0.0) break;
    double next = x - fx / d;
    if (!(next >= std::min(a, b) && next <= std::max(a, b))) break;
    if (std::abs(f(next)) >= std::abs(fx)) break;
    x = next;
  }
  return x;
}

}  // namespace snlevy::detail
