#include "oracles.hpp"

#include "snlevy/errors.hpp"
#include "snlevy/scale_fn.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

using namespace snlevy;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("closed form W and Z for Brownian motion with drift", "[scale_fn]") {
  const auto m = oracle::b1();
  for (double q : {-0.5, -0.45, -0.2, 0.0, 0.3, 2.0}) {
    const ScaleFunction sf(m, q);
    for (double x : {0.0, 0.01, 0.5, 1.0, 3.0, 10.0}) {
      CHECK_THAT(sf.w(x), WithinRel(oracle::b1_w(q, x), 1e-10) || WithinAbs(0.0, 1e-14));
      CHECK_THAT(sf.z(x), WithinRel(oracle::b1_z(q, x), 1e-10));
    }
    CHECK(sf.w(-1.0) == 0.0);
    CHECK(sf.z(-1.0) == 1.0);
  }
}

TEST_CASE("W at zero is 0 when there is a Gaussian part", "[scale_fn]") {
  CHECK_THAT(w_q(oracle::j1(), 0.1, 0.0), WithinAbs(0.0, 1e-15));
  // W'(0+) = 2 / sigma^2
  const ScaleFunction sf(oracle::j1(), 0.1);
  CHECK_THAT(sf.w_prime(1e-9), WithinRel(2.0, 1e-6));
}

TEST_CASE("partial fractions reconstruct 1/(psi - q)", "[scale_fn]") {
  const auto m = oracle::j1();
  const double qs = critical_point(m).q_star;
  for (double q : {-qs, -0.9 * qs, -0.1, 0.0, 0.5}) {
    const auto rs = psi_roots_all(m, q);
    CHECK(rs.degree() == 3);
    for (double l : {1.5, 2.0, 5.0, 20.0})
      CHECK_THAT(rs.reconstruct(l), WithinRel(1.0 / (psi(m, l) - q), 1e-9));
  }
  const auto crit = psi_roots_all(m, -qs);
  CHECK(crit.terms.back().multiplicity == 2);
  CHECK_THAT(crit.largest(), WithinAbs(oracle::kJ1LambdaStar, 1e-9));
  CHECK_THROWS_AS(psi_roots_all(m, -qs - 1e-3), DomainError);
}

TEST_CASE("closed form agrees with Talbot inversion", "[scale_fn]") {
  const auto m = oracle::j1();
  const double qs = critical_point(m).q_star;
  for (double q : {-qs, -0.9 * qs, 0.0, 1.0}) {
    const ScaleFunction sf(m, q);
    for (double x : {0.05, 0.5, 2.0, 6.0}) {
      CHECK_THAT(sf.w(x), WithinRel(w_numeric(m, q, x), 1e-8));
    }
  }
  CHECK_THROWS_AS(w_numeric(m, 0.0, 0.0), ArgumentError);
  CHECK_THROWS_AS(w_numeric(m, 0.0, 1.0, {0.1, 24}), ArgumentError);
}

TEST_CASE("Laplace transform of W by quadrature", "[scale_fn]") {
  // int_0^inf e^{-l x} W^(q)(x) dx = 1 / (psi(l) - q), l > Phi_+(q)
  const auto m = oracle::j1();
  const double q = 0.2;
  const ScaleFunction sf(m, q);
  const double l = sf.roots().largest() + 1.0;
  const int n = 40000;
  const double top = 60.0, h = top / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::exp(-l * x) * sf.w(x);
  }
  s *= h / 3.0;
  CHECK_THAT(s, WithinRel(1.0 / (psi(m, l) - q), 1e-8));
}

TEST_CASE("Z is one plus q times the integral of W", "[scale_fn]") {
  const auto m = oracle::j1();
  const double q = -0.15;
  const ScaleFunction sf(m, q);
  const int n = 20000;
  const double x = 4.0, h = x / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * sf.w(i * h);
  }
  s *= h / 3.0;
  CHECK_THAT(sf.z(x), WithinRel(1.0 + q * s, 1e-10));
}

TEST_CASE("derivative and weighted integral", "[scale_fn]") {
  const ScaleFunction sf(oracle::j1(), -0.1);
  const double h = 1e-6;
  for (double x : {0.3, 1.0, 5.0}) {
    CHECK_THAT(sf.w_prime(x), WithinRel((sf.w(x + h) - sf.w(x - h)) / (2 * h), 1e-6));
    CHECK_THAT(sf.w_scaled(x, 0.7), WithinRel(std::exp(-0.7 * x) * sf.w(x), 1e-12));
  }
  const double kappa = -0.4, x = 3.0;
  const int n = 20000;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = x * i / n;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::exp(kappa * t) * sf.w(t);
  }
  s *= x / n / 3.0;
  CHECK_THAT(sf.exp_weighted_integral(kappa, x), WithinRel(s, 1e-10));
}

TEST_CASE("tilted scale function", "[scale_fn]") {
  const auto m = oracle::j1();
  for (double c : {0.2, oracle::kJ1LambdaStar, 1.5}) {
    const auto t = esscher_tilt(m, c);
    for (double x : {0.5, 2.0, 7.0}) {
      const double direct = w_q(t, 0.0, x);
      CHECK_THAT(tilted_w(m, c, x), WithinRel(direct, 1e-9));
      CHECK_THAT(tilted_w(m, c, x), WithinRel(std::exp(-c * x) * w_q(m, psi(m, c), x), 1e-9));
    }
  }
}

TEST_CASE("critical tilted scale function is concave for exponential jumps", "[scale_fn]") {
  std::vector<double> grid;
  for (int i = 0; i <= 400; ++i) grid.push_back(0.05 * i);
  for (const auto& m : {oracle::b1(), oracle::j1()}) {
    const auto r = concavity_check(m, grid);
    CHECK(r.is_concave);
    CHECK(r.worst_violation <= kConcavityTolerance);
  }
  const std::vector<double> bad{0.0, 1.0};
  CHECK_THROWS_AS(concavity_check(oracle::b1(), bad), ArgumentError);
}

TEST_CASE("asymptotic constants", "[scale_fn]") {
  const auto b = asym_constants(oracle::b1(), 0.45);
  const double s = std::sqrt(0.1);
  CHECK_THAT(b.limW_plus_coeff, WithinRel(1.0 / s, 1e-12));
  CHECK_THAT(b.limWq_slope, WithinRel(2.0, 1e-12));
  // W^(-beta)(z) e^{-Phi_+ z} converges to the coefficient
  const ScaleFunction sf(oracle::b1(), -0.45);
  CHECK_THAT(sf.w_scaled(60.0, 1.0 + s), WithinRel(b.limW_plus_coeff, 1e-6));
  const auto j = asym_constants(oracle::j1(), 0.9 * oracle::kJ1QStar);
  CHECK_THAT(j.chi, WithinRel(oracle::kJ1ChiBeta, 1e-10));
  const auto jc = asym_constants(oracle::j1(), oracle::kJ1QStar);
  CHECK_THAT(jc.chi, WithinRel(oracle::kJ1ChiCritical, 1e-10));
  CHECK(std::isnan(jc.limW_plus_coeff));
  CHECK_THROWS_AS(asym_constants(oracle::b1(), 0.6), RegimeError);
}
