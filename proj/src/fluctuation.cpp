#include "snlevy/fluctuation.hpp"

#include "snlevy/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

namespace snlevy {

namespace {

const LevyModel& checked(const LevyModel& model, double beta) {
  require_extinction(model, beta);
  return model;
}

void check_strip(double a, double x) {
  if (!(a > 0.0) || !(x > a) || !std::isfinite(x))
    throw ArgumentError("starting point must satisfy 0 < a < x");
}

// int_0^a (c0 + c1 s) e^{r s} ds
double poly_exp_integral(double c0, double c1, double r, double a) {
  double v = c0 * (r == 0.0 ? a : std::expm1(r * a) / r);
  if (c1 != 0.0) {
    const double ra = r * a;
    if (std::abs(ra) < 1e-3)
      v += c1 * a * a * (0.5 + ra * (1.0 / 3.0 + ra * (1.0 / 8.0 + ra / 30.0)));
    else
      v += c1 * (std::exp(ra) * (ra - 1.0) + 1.0) / (r * r);
  }
  return v;
}

}  // namespace

double UndershootLaw::total_mass() const noexcept {
  double m = creep_atom;
  for (const auto& c : components) m += c.weight;
  return m;
}

double UndershootLaw::transform(double s) const {
  double v = creep_atom;
  for (const auto& c : components) {
    if (!(s < c.rate)) throw DomainError("UndershootLaw::transform: s must be below every rate");
    v += c.weight * c.rate / (c.rate - s);
  }
  return v;
}

ProgenyMoments::ProgenyMoments(const LevyModel& model, double beta)
    : beta_(beta), scale_(checked(model, beta), -beta) {}

double ProgenyMoments::mean(double a) const noexcept {
  if (a <= 0.0) return 1.0;
  // Z(a) + (beta/phi) W(a) = 1 + q int_0^a W - (q/phi) W(a), q = -beta.
  // The e^{phi a} contributions of the top root cancel exactly and are dropped.
  const double q = -beta_;
  const auto& terms = scale_.roots().terms;
  const double phi = terms.back().theta;
  double v = 1.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = terms[i];
    const bool top = i + 1 == terms.size();
    if (top && t.multiplicity == 1) {
      v -= q * t.c0 / phi;
    } else if (top) {
      // double root at phi: c0 part gives -c0/phi, c1 part gives -expm1(phi a)/phi^2
      v += q * (-t.c0 / phi - t.c1 * std::expm1(phi * a) / (phi * phi));
    } else {
      v += q * (poly_exp_integral(t.c0, t.c1, t.theta, a) -
                (t.c0 + t.c1 * a) * std::exp(t.theta * a) / phi);
    }
  }
  return v;
}

double ProgenyMoments::up(double a, double x) const noexcept {
  if (a >= x) return 1.0;
  if (a <= 0.0) return 0.0;
  return scale_.w(a) / scale_.w(x);
}

double ProgenyMoments::down(double a, double x) const noexcept {
  if (a >= x) return 0.0;
  if (a <= 0.0) return 1.0;
  // E_a[e^{beta tau_0}] - E_a[e^{beta tau_x}; tau_x < tau_0] E_x[e^{beta tau_0}]
  return mean(a) - up(a, x) * mean(x);
}

double ProgenyMoments::resolvent(double a, double x, double y) const noexcept {
  if (!(y > 0.0) || !(y < x)) return 0.0;
  double v = scale_.w(a) * scale_.w(x - y) / scale_.w(x);
  if (a >= y) v -= scale_.w(a - y);
  return std::max(v, 0.0);
}

double ProgenyMoments::second_moment(double a, double x) const {
  if (a <= 0.0) return 1.0;
  if (a >= x) return 0.0;
  auto integrand = [&](double y) {
    const double m = down(y, x);
    return m * m * resolvent(a, x, y);
  };
  using boost::math::quadrature::gauss_kronrod;
  constexpr double tol = 1e-11;
  // kink of the resolvent at y = a
  const double left = gauss_kronrod<double, 31>::integrate(integrand, 0.0, a, 20, tol);
  const double right = gauss_kronrod<double, 31>::integrate(integrand, a, x, 20, tol);
  return down(a, x) + 2.0 * beta_ * (left + right);
}

ExitFunctionals exit_functionals(const LevyModel& model, double beta, double a, double x) {
  check_strip(a, x);
  ProgenyMoments pm(model, beta);
  return {pm.up(a, x), pm.down(a, x)};
}

double mean_progeny(const LevyModel& model, double beta, double a, std::optional<double> barrier) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ArgumentError("mean_progeny: a must be > 0");
  ProgenyMoments pm(model, beta);
  if (barrier) {
    check_strip(a, *barrier);
    return pm.down(a, *barrier);
  }
  return pm.mean(a);
}

double mean_progeny_tilted(const LevyModel& model, double beta, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ArgumentError("mean_progeny_tilted: a must be > 0");
  const auto cp = require_extinction(model, beta);
  const double c = beta >= cp.q_star ? cp.lambda_star : phi_roots(model, -beta).minus;
  return std::exp(c * a) * tilted_undershoot_transform(model, c, a);
}

double resolvent_density(const LevyModel& model, double q, double a, double x, double y) {
  check_strip(a, x);
  ScaleFunction sf(model, q);
  if (!(y > 0.0) || !(y < x)) return 0.0;
  double v = sf.w(a) * sf.w(x - y) / sf.w(x);
  if (a >= y) v -= sf.w(a - y);
  return std::max(v, 0.0);
}

UndershootLaw undershoot_law(const LevyModel& model, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ArgumentError("undershoot_law: a must be > 0");
  const ScaleFunction sf(model, 0.0);
  const auto& terms = sf.roots().terms;
  const ScaleTerm& top = terms.back();
  const double phi0 = top.theta;  // Phi_+(0)

  UndershootLaw law;
  // sigma^2/2 (W'(a) - phi0 W(a)); the top root contributes only through c1.
  double creep = 0.0;
  for (const auto& t : terms) {
    const double e = std::exp(t.theta * a);
    if (&t == &top)
      creep += t.c1 * e;
    else
      creep += ((t.theta - phi0) * (t.c0 + t.c1 * a) + t.c1) * e;
  }
  law.creep_atom = 0.5 * model.gaussian_sq() * creep;

  // Pre-jump position u has density e^{-phi0 u} W(a) - W(a-u); a jump from u
  // lands at z with density rho eta e^{eta (z - u)}.
  for (const auto& j : model.jumps()) {
    const double eta = j.rate;
    const double decay = std::exp(-eta * a);
    double k = 0.0;  // int_0^inf (e^{-phi0 u} W(a) - W(a-u)) e^{-eta u} du
    for (const auto& t : terms) {
      const double r = t.theta + eta;
      const double e = std::exp(t.theta * a);
      if (&t == &top) {
        k += t.c0 * decay / r;
        if (t.c1 != 0.0) k += t.c1 * (e - decay) / (r * r);
      } else {
        k += t.c0 * (e / (phi0 + eta) - (e - decay) / r);
        if (t.c1 != 0.0)
          k += t.c1 * (a * e / (phi0 + eta) - (e * (r * a - 1.0) + decay) / (r * r));
      }
    }
    law.components.push_back({eta, j.intensity * k});
  }
  return law;
}

double tilted_undershoot_transform(const LevyModel& model, double c, double a) {
  return undershoot_law(esscher_tilt(model, c), a).transform(c);
}

double h_function(const LevyModel& model, double upper, double start) {
  check_strip(start, upper);
  const auto cp = critical_point(model);
  ProgenyMoments pm(model, cp.q_star);
  const double w_upper = pm.scale().w_scaled(upper, cp.lambda_star);
  return w_upper * std::exp(-cp.lambda_star * start) * pm.down(start, upper);
}

double h_function_tilted(const LevyModel& model, double upper, double start) {
  check_strip(start, upper);
  const auto cp = critical_point(model);
  const ScaleFunction sf(model, -cp.q_star);
  const double c = cp.lambda_star;
  return sf.w_scaled(upper, c) * tilted_undershoot_transform(model, c, start) -
         sf.w_scaled(start, c) * tilted_undershoot_transform(model, c, upper);
}

double second_moment_barrier(const LevyModel& model, double beta, double a, double x) {
  check_strip(a, x);
  return ProgenyMoments(model, beta).second_moment(a, x);
}

}  // namespace snlevy
