#include "snlevy/scale_fn.hpp"

#include "snlevy/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>

namespace snlevy {

namespace {

using cplx = std::complex<double>;

// Jump components with equal rates share a pole; merge them.
LevyModel merged(const LevyModel& model) {
  std::map<double, double> by_rate;
  for (const auto& j : model.jumps()) by_rate[j.rate] += j.intensity;
  std::vector<JumpComponent> jumps;
  for (const auto& [rate, intensity] : by_rate) jumps.push_back({intensity, rate});
  return LevyModel(model.drift(), model.gaussian_sq(), std::move(jumps));
}

// A point just right (side=+1) or left (side=-1) of the pole at `pole` where
// g has the sign `want`.
template <class G>
double near_pole(G&& g, double pole, int side, double scale, int want) {
  double eps = 1e-6 * scale;
  for (int i = 0; i < 60; ++i) {
    double p = pole + side * eps;
    double v = g(p);
    if ((want > 0 && v > 0.0) || (want < 0 && v < 0.0)) return p;
    eps *= 0.1;
    if (eps < 1e-300) break;
  }
  throw std::logic_error("psi_roots_all: could not bracket root near pole");
}

// (e^{r x} - 1) / r
double expm1_over(double r, double x) {
  if (r == 0.0) return x;
  return std::expm1(r * x) / r;
}

// int_0^x s e^{r s} ds = (e^{r x}(r x - 1) + 1) / r^2
double s_exp_integral(double r, double x) {
  const double rx = r * x;
  if (std::abs(rx) < 1e-3) {
    // x^2 (1/2 + rx/3 + (rx)^2/8 + (rx)^3/30 + (rx)^4/144)
    return x * x * (0.5 + rx * (1.0 / 3.0 + rx * (1.0 / 8.0 + rx * (1.0 / 30.0 + rx / 144.0))));
  }
  return (std::exp(rx) * (rx - 1.0) + 1.0) / (r * r);
}

cplx psi_complex(const LevyModel& m, cplx s) {
  cplx v = m.drift() * s + 0.5 * m.gaussian_sq() * s * s;
  for (const auto& j : m.jumps()) v -= j.intensity * s / (j.rate + s);
  return v;
}

}  // namespace

int RootSystem::degree() const noexcept {
  int d = 0;
  for (const auto& t : terms) d += t.multiplicity;
  return d;
}

double RootSystem::reconstruct(double lam) const noexcept {
  double v = 0.0;
  for (const auto& t : terms) {
    double u = lam - t.theta;
    v += t.c0 / u + t.c1 / (u * u);
  }
  return v;
}

RootSystem psi_roots_all(const LevyModel& input, double q) {
  if (!std::isfinite(q)) throw DomainError("psi_roots_all: q must be finite");
  const LevyModel model = merged(input);
  const auto& jumps = model.jumps();  // ascending rate
  auto g = [&](double l) { return detail::psi_ext(model, l, 0) - q; };
  auto dg = [&](double l) { return detail::psi_ext(model, l, 1); };
  auto d2g = [&](double l) { return detail::psi_ext(model, l, 2); };

  std::vector<double> simple;
  RootSystem rs{q, {}};

  // Region right of the largest pole: g is convex with a unique minimum.
  const bool has_jumps = !jumps.empty();
  const double left_pole = has_jumps ? -jumps.front().rate : -std::numeric_limits<double>::infinity();
  const double scale = has_jumps ? jumps.front().rate : 1.0;

  double mu_lo;
  if (has_jumps) {
    mu_lo = near_pole(dg, left_pole, +1, scale, -1);
  } else {
    mu_lo = -1.0;
    for (int i = 0; i < 200 && dg(mu_lo) >= 0.0; ++i) mu_lo *= 2.0;
  }
  double mu_hi = 1.0;
  for (int i = 0; i < 200 && dg(mu_hi) <= 0.0; ++i) mu_hi *= 2.0;
  const double mu = detail::solve_bracketed(dg, d2g, mu_lo, mu_hi);
  const double gmin = g(mu);
  const double tol = kCriticalTolerance * std::max(1.0, std::abs(q));

  bool double_root = false;
  if (gmin >= 0.0) {
    if (gmin > tol) throw DomainError("psi_roots_all: q < -q_star, no real root");
    double_root = true;
  } else {
    double lo;
    if (has_jumps) {
      lo = near_pole(g, left_pole, +1, scale, +1);
    } else {
      double step = 1.0;
      lo = mu - step;
      for (int i = 0; i < 200 && g(lo) <= 0.0; ++i) lo = mu - (step *= 2.0);
    }
    double step = 1.0;
    double hi = mu + step;
    for (int i = 0; i < 200 && g(hi) <= 0.0; ++i) hi = mu + (step *= 2.0);
    const double r_left = detail::solve_bracketed(g, dg, lo, mu);
    const double r_right = detail::solve_bracketed(g, dg, mu, hi);
    if (r_right - r_left < kDoubleRootGap) {
      double_root = true;
    } else {
      simple.push_back(r_left);
      simple.push_back(r_right);
    }
  }

  if (has_jumps) {
    // Between consecutive poles g runs from +inf (right of the left pole) to
    // -inf (left of the right pole).
    for (std::size_t k = 0; k + 1 < jumps.size(); ++k) {
      const double right_pole = -jumps[k].rate;
      const double lpole = -jumps[k + 1].rate;
      const double width = right_pole - lpole;
      const double lo = near_pole(g, lpole, +1, width, +1);
      const double hi = near_pole(g, right_pole, -1, width, -1);
      simple.push_back(detail::solve_bracketed(g, dg, lo, hi));
    }
    // Left of the smallest pole g runs from +inf at -inf to -inf at the pole.
    const double last_pole = -jumps.back().rate;
    const double hi = near_pole(g, last_pole, -1, jumps.back().rate, -1);
    double step = jumps.back().rate;
    double lo = last_pole - step;
    for (int i = 0; i < 200 && g(lo) <= 0.0; ++i) lo = last_pole - (step *= 2.0);
    simple.push_back(detail::solve_bracketed(g, dg, lo, hi));
  }

  for (double theta : simple) rs.terms.push_back({theta, 1, 1.0 / dg(theta), 0.0});
  if (double_root) {
    // 1/(psi - q) ~ 2/(psi'' u^2) - 2 psi'''/(3 psi''^2 u) near the double root.
    const double p2 = detail::psi_ext(model, mu, 2);
    const double p3 = detail::psi_ext(model, mu, 3);
    rs.terms.push_back({mu, 2, -2.0 * p3 / (3.0 * p2 * p2), 2.0 / p2});
  }
  std::sort(rs.terms.begin(), rs.terms.end(),
            [](const ScaleTerm& a, const ScaleTerm& b) { return a.theta < b.theta; });
  return rs;
}

ScaleFunction::ScaleFunction(const LevyModel& model, double q) : roots_(psi_roots_all(model, q)) {}

double ScaleFunction::w(double x) const noexcept { return w_scaled(x, 0.0); }

double ScaleFunction::w_scaled(double x, double c) const noexcept {
  // W(0) = 0 whenever sigma^2 > 0; the coefficient sum only cancels to rounding
  if (x <= 0.0) return 0.0;
  double v = 0.0;
  for (const auto& t : roots_.terms) v += (t.c0 + t.c1 * x) * std::exp((t.theta - c) * x);
  return v;
}

double ScaleFunction::w_prime(double x) const noexcept {
  if (x < 0.0) return 0.0;
  double v = 0.0;
  for (const auto& t : roots_.terms)
    v += (t.theta * (t.c0 + t.c1 * x) + t.c1) * std::exp(t.theta * x);
  return v;
}

double ScaleFunction::exp_weighted_integral(double kappa, double x) const noexcept {
  if (x <= 0.0) return 0.0;
  double v = 0.0;
  for (const auto& t : roots_.terms) {
    const double r = t.theta + kappa;
    v += t.c0 * expm1_over(r, x);
    if (t.c1 != 0.0) v += t.c1 * s_exp_integral(r, x);
  }
  return v;
}

double ScaleFunction::z(double x) const noexcept {
  if (x <= 0.0 || roots_.q == 0.0) return 1.0;
  return 1.0 + roots_.q * exp_weighted_integral(0.0, x);
}

double w_q(const LevyModel& model, double q, double x) {
  if (x < 0.0) {
    psi_roots_all(model, q);  // domain check only
    return 0.0;
  }
  return ScaleFunction(model, q).w(x);
}

double z_q(const LevyModel& model, double q, double x) {
  if (x <= 0.0) {
    psi_roots_all(model, q);
    return 1.0;
  }
  return ScaleFunction(model, q).z(x);
}

double w_numeric(const LevyModel& model, double q, double x, InversionOptions options) {
  if (!(x > 0.0)) throw ArgumentError("w_numeric: x must be > 0");
  if (options.nodes < 2) throw ArgumentError("w_numeric: need at least 2 contour nodes");
  const double top = psi_roots_all(model, q).largest();
  const double shift = options.shift < 0.0 ? top + 1.0 : options.shift;
  if (!(shift > top))
    throw ArgumentError("w_numeric: contour abscissa must exceed Phi_+(q)");

  // Fixed Talbot contour s(theta) = r theta (cot theta + i) for the shifted
  // transform G(s) = 1/(psi(s + shift) - q), whose singularities lie on the
  // negative real axis.
  auto transform = [&](cplx s) { return 1.0 / (psi_complex(model, s + shift) - q); };
  const int m = options.nodes;
  const double r = 2.0 * m / (5.0 * x);
  double sum = 0.5 * std::exp(r * x) * transform(cplx(r, 0.0)).real();
  for (int k = 1; k < m; ++k) {
    const double theta = k * std::numbers::pi / m;
    const double cot = std::cos(theta) / std::sin(theta);
    const cplx s(r * theta * cot, r * theta);
    const double sigma = theta + (theta * cot - 1.0) * cot;
    sum += (std::exp(x * s) * transform(s) * cplx(1.0, sigma)).real();
  }
  return std::exp(shift * x) * r / m * sum;
}

double tilted_w(const LevyModel& model, double c, double x) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw ArgumentError("tilted_w: c must be >= 0");
  const double q = c == 0.0 ? 0.0 : detail::psi_ext(model, c, 0);
  ScaleFunction sf(model, q);
  return sf.w_scaled(x, c);
}

ConcavityReport concavity_check(const LevyModel& model, std::span<const double> x_grid) {
  if (x_grid.size() < 3) throw ArgumentError("concavity_check: grid needs at least 3 points");
  for (std::size_t i = 1; i < x_grid.size(); ++i)
    if (!(x_grid[i] > x_grid[i - 1]))
      throw ArgumentError("concavity_check: grid must be strictly increasing");
  const auto cp = critical_point(model);
  ScaleFunction sf(model, -cp.q_star);
  std::vector<double> f(x_grid.size());
  for (std::size_t i = 0; i < x_grid.size(); ++i) f[i] = sf.w_scaled(x_grid[i], cp.lambda_star);

  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < x_grid.size(); ++i) {
    const double h0 = x_grid[i] - x_grid[i - 1];
    const double h1 = x_grid[i + 1] - x_grid[i];
    // slope difference scaled to the plain second difference on uniform grids
    const double d2 = ((f[i + 1] - f[i]) / h1 - (f[i] - f[i - 1]) / h0) * 0.5 * (h0 + h1);
    worst = std::max(worst, d2);
  }
  return {worst <= kConcavityTolerance, worst};
}

AsymptoticConstants asym_constants(const LevyModel& model, double beta) {
  const auto report = classify_regime(model, beta);
  const double lam = report.lambda_star;
  AsymptoticConstants k{};
  if (report.regime != Regime::Subcritical && report.regime != Regime::Critical)
    throw RegimeError("asym_constants: requires the subcritical or critical regime");
  const double p2 = detail::psi_ext(model, lam, 2);
  const double p3 = detail::psi_ext(model, lam, 3);
  k.limWq_slope = 2.0 / p2;
  k.shift_integral = -2.0 * p3 / (3.0 * p2 * p2);

  const double s2 = model.gaussian_sq();
  if (report.regime == Regime::Subcritical) {
    const double lo = report.phi_minus;
    const double hi = report.phi_plus;
    // int_0^inf (e^{-hi v} - e^{-lo v}) nu(-inf, -v) dv with nu(-inf,-v) = sum rho e^{-eta v}
    double integral = 0.0;
    for (const auto& j : model.jumps())
      integral += j.intensity * (1.0 / (hi + j.rate) - 1.0 / (lo + j.rate));
    k.chi = (integral + 0.5 * s2 * (lo - hi)) / detail::psi_ext(model, lo, 1);
    k.limW_plus_coeff = 1.0 / detail::psi_ext(model, hi, 1);
  } else {
    // int_0^inf 2u e^{-lam u} nu(-inf,-u) du = sum 2 rho / (lam + eta)^2
    double integral = 0.0;
    for (const auto& j : model.jumps()) integral += 2.0 * j.intensity / ((lam + j.rate) * (lam + j.rate));
    k.chi = (integral + s2) / p2;
    k.limW_plus_coeff = std::numeric_limits<double>::quiet_NaN();
  }
  if (!(k.chi > 0.0)) throw std::logic_error("asym_constants: non-positive chi");
  return k;
}

}  // namespace snlevy
