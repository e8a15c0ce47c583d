#include "oracles.hpp"

#include "snlevy/errors.hpp"
#include "snlevy/levy_model.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace snlevy;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("model invariants are enforced", "[levy_model]") {
  CHECK_THROWS_AS(LevyModel(-1.0, 0.0), ArgumentError);
  CHECK_THROWS_AS(LevyModel(-1.0, -1.0), ArgumentError);
  CHECK_THROWS_AS(LevyModel(-1.0, 1.0, {{0.0, 1.0}}), ArgumentError);
  CHECK_THROWS_AS(LevyModel(-1.0, 1.0, {{1.0, -2.0}}), ArgumentError);
  CHECK_THROWS_AS(LevyModel(NAN, 1.0), ArgumentError);
  CHECK(oracle::j1().total_jump_intensity() == 0.5);
}

TEST_CASE("psi of Brownian motion with drift", "[levy_model]") {
  const auto m = oracle::b1();
  for (double l : {0.0, 0.3, 1.0, 2.5, 10.0}) {
    CHECK_THAT(psi(m, l), WithinAbs(0.5 * l * l - l, 1e-14));
    CHECK_THAT(psi(m, l, 1), WithinAbs(l - 1.0, 1e-14));
    CHECK(psi(m, l, 2) == 1.0);
    CHECK(psi(m, l, 3) == 0.0);
  }
  CHECK(psi(oracle::j1(), 0.0) == 0.0);
  CHECK_THROWS_AS(psi(m, -0.1), DomainError);
  CHECK_THROWS_AS(psi(m, 1.0, 4), ArgumentError);
  CHECK_THROWS_AS(psi(m, 1.0, -1), ArgumentError);
}

TEST_CASE("psi derivatives match finite differences", "[levy_model]") {
  const auto m = oracle::j1();
  const double h = 1e-5;
  for (double l : {0.2, 0.64, 1.5, 4.0}) {
    for (int k = 1; k <= 3; ++k) {
      const double fd = (psi(m, l + h, k - 1) - psi(m, l - h, k - 1)) / (2.0 * h);
      CHECK_THAT(psi(m, l, k), WithinAbs(fd, 1e-7));
    }
  }
}

TEST_CASE("psi is the log of E[exp(lambda L_1)] for a jump-only check", "[levy_model]") {
  // E[exp(-lambda J)] for J ~ Exp(eta) equals eta/(eta+lambda)
  const auto m = oracle::j1();
  const double l = 0.8;
  const double expected = -0.5 * l + 0.5 * l * l + 0.5 * (2.0 / (2.0 + l) - 1.0);
  CHECK_THAT(psi(m, l), WithinAbs(expected, 1e-15));
}

TEST_CASE("compensated drift", "[levy_model]") {
  // d + int_{-1}^0 x rho eta e^{eta x} dx, integrated by Simpson's rule
  const auto m = oracle::j1();
  const int n = 2000;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = -1.0 + static_cast<double>(i) / n;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * x * 0.5 * 2.0 * std::exp(2.0 * x);
  }
  s /= 3.0 * n;
  CHECK_THAT(m.compensated_drift(), WithinAbs(-0.5 + s, 1e-12));
  CHECK(oracle::b1().compensated_drift() == -1.0);
}

TEST_CASE("critical point", "[levy_model]") {
  const auto b = critical_point(oracle::b1());
  CHECK_THAT(b.lambda_star, WithinAbs(1.0, 1e-12));
  CHECK_THAT(b.q_star, WithinAbs(0.5, 1e-12));
  const auto j = critical_point(oracle::j1());
  CHECK_THAT(j.lambda_star, WithinAbs(oracle::kJ1LambdaStar, 1e-13));
  CHECK_THAT(j.q_star, WithinAbs(oracle::kJ1QStar, 1e-13));
  CHECK_THROWS_AS(critical_point(LevyModel(1.0, 1.0)), RegimeError);
}

TEST_CASE("phi roots of Brownian motion with drift", "[levy_model]") {
  const auto m = oracle::b1();
  for (double q : {-0.45, -0.3, -0.1, -1e-6}) {
    const auto r = phi_roots(m, q);
    CHECK_THAT(r.minus, WithinAbs(1.0 - std::sqrt(1.0 + 2.0 * q), 1e-12));
    CHECK_THAT(r.plus, WithinAbs(1.0 + std::sqrt(1.0 + 2.0 * q), 1e-12));
  }
  const auto z = phi_roots(m, 0.0);
  CHECK(z.minus == 0.0);
  CHECK_THAT(z.plus, WithinAbs(2.0, 1e-14));
  const auto p = phi_roots(m, 1.5);
  CHECK(p.minus == p.plus);
  CHECK_THAT(p.plus, WithinAbs(1.0 + std::sqrt(4.0), 1e-12));
  const auto c = phi_roots(m, -0.5);
  CHECK(c.minus == c.plus);
  CHECK_THAT(c.plus, WithinAbs(1.0, 1e-12));
  CHECK_THROWS_AS(phi_roots(m, -0.6), DomainError);
  CHECK_THROWS_AS(phi_roots(LevyModel(1.0, 1.0), -0.1), RegimeError);
}

TEST_CASE("phi roots solve psi = q on a grid", "[levy_model]") {
  for (const auto& m : {oracle::b1(), oracle::j1()}) {
    const double qs = critical_point(m).q_star;
    for (int k = 0; k <= 100; ++k) {
      const double q = -qs + (10.0 + qs) * k / 100.0;
      const auto r = phi_roots(m, q);
      CHECK(std::abs(detail::psi_ext(m, r.plus, 0) - q) <= 1e-10);
      CHECK(std::abs(detail::psi_ext(m, r.minus, 0) - q) <= 1e-10);
      CHECK(r.minus <= r.plus);
    }
  }
  const auto r = phi_roots(oracle::j1(), -0.9 * oracle::kJ1QStar);
  CHECK_THAT(r.minus, WithinAbs(oracle::kJ1PhiMinus, 1e-12));
  CHECK_THAT(r.plus, WithinAbs(oracle::kJ1PhiPlus, 1e-12));
}

TEST_CASE("Esscher tilt shifts psi", "[levy_model]") {
  const auto m = oracle::j1();
  for (double c : {0.0, 0.3, 0.64, 2.0}) {
    const auto t = esscher_tilt(m, c);
    for (double l : {0.0, 0.1, 0.5, 1.0, 3.0})
      CHECK_THAT(psi(t, l), WithinAbs(psi(m, l + c) - psi(m, c), 1e-13));
  }
  CHECK(esscher_tilt(m, 0.0) == m);
  CHECK_THROWS_AS(esscher_tilt(m, -1.0), ArgumentError);
}

TEST_CASE("regime classification", "[levy_model]") {
  const auto m = oracle::b1();
  const auto sub = classify_regime(m, 0.45);
  CHECK(sub.regime == Regime::Subcritical);
  CHECK_THAT(sub.tail_exponent(), WithinRel(1.3162277660168379 / 0.6837722339831621, 1e-12));
  CHECK(sub.gamma_index == 1);
  const auto crit = classify_regime(m, 0.5);
  CHECK(crit.regime == Regime::Critical);
  CHECK(std::isnan(crit.tail_exponent()));
  CHECK(classify_regime(m, 0.6).regime == Regime::NoAlmostSureExtinction);
  CHECK(classify_regime(LevyModel(1.0, 1.0), 0.5).regime == Regime::DriftNonNegative);
  CHECK(to_string(Regime::Critical) == "Critical");
  CHECK_THROWS_AS(classify_regime(m, 0.0), ArgumentError);
  CHECK_THROWS_AS(require_extinction(m, 0.6), RegimeError);
  CHECK_NOTHROW(require_extinction(m, 0.5));
}
