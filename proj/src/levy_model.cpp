#include "snlevy/levy_model.hpp"

#include "snlevy/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace snlevy {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Smallest power-of-two multiple of `start` at which pred holds.
template <class Pred>
double expand_until(double start, Pred&& pred) {
  double hi = start;
  for (int i = 0; i < 200 && !pred(hi); ++i) hi *= 2.0;
  return hi;
}

double root_of_psi(const LevyModel& m, double q, double lo, double hi) {
  return detail::solve_bracketed([&](double l) { return detail::psi_ext(m, l, 0) - q; },
                                 [&](double l) { return detail::psi_ext(m, l, 1); }, lo, hi);
}

}  // namespace

LevyModel::LevyModel(double drift, double gaussian_sq, std::vector<JumpComponent> jumps)
    : drift_(drift), gaussian_sq_(gaussian_sq), jumps_(std::move(jumps)) {
  if (!std::isfinite(drift_)) throw ArgumentError("drift must be finite");
  if (!(gaussian_sq_ > 0.0) || !std::isfinite(gaussian_sq_))
    throw ArgumentError("sigma_sq must be finite and > 0");
  for (const auto& j : jumps_) {
    if (!(j.intensity > 0.0) || !std::isfinite(j.intensity))
      throw ArgumentError("jump intensity must be finite and > 0");
    if (!(j.rate > 0.0) || !std::isfinite(j.rate))
      throw ArgumentError("jump rate must be finite and > 0");
  }
}

double LevyModel::total_jump_intensity() const noexcept {
  double total = 0.0;
  for (const auto& j : jumps_) total += j.intensity;
  return total;
}

double LevyModel::compensated_drift() const noexcept {
  // d_compensated = d + int_{(-1,0)} x nu(dx)
  double d = drift_;
  for (const auto& j : jumps_) {
    double e = std::exp(-j.rate);
    d += j.intensity * (e - (1.0 - e) / j.rate);
  }
  return d;
}

namespace detail {

double psi_ext(const LevyModel& model, double lam, int order) {
  const double s2 = model.gaussian_sq();
  double value = 0.0;
  switch (order) {
    case 0: value = model.drift() * lam + 0.5 * s2 * lam * lam; break;
    case 1: value = model.drift() + s2 * lam; break;
    case 2: value = s2; break;
    case 3: value = 0.0; break;
    default: throw ArgumentError("psi: order must be in 0..3");
  }
  // -rho * lam / (eta + lam) and its derivatives
  for (const auto& j : model.jumps()) {
    const double rho = j.intensity;
    const double eta = j.rate;
    const double den = eta + lam;
    switch (order) {
      case 0: value -= rho * lam / den; break;
      case 1: value -= rho * eta / (den * den); break;
      case 2: value += 2.0 * rho * eta / (den * den * den); break;
      case 3: value -= 6.0 * rho * eta / (den * den * den * den); break;
    }
  }
  return value;
}

}  // namespace detail

double psi(const LevyModel& model, double lam, int order) {
  if (order < 0 || order > 3) throw ArgumentError("psi: order must be in 0..3");
  if (!(lam >= 0.0)) throw DomainError("psi: lambda must be >= 0");
  if (order == 0 && lam == 0.0) return 0.0;
  return detail::psi_ext(model, lam, order);
}

CriticalPoint critical_point(const LevyModel& model) {
  if (!(detail::psi_ext(model, 0.0, 1) < 0.0))
    throw RegimeError("critical_point: psi'(0+) >= 0, psi has no interior minimum");
  auto dpsi = [&](double l) { return detail::psi_ext(model, l, 1); };
  auto d2psi = [&](double l) { return detail::psi_ext(model, l, 2); };
  double hi = expand_until(1.0, [&](double h) { return dpsi(h) > 0.0; });
  double lam = detail::solve_bracketed(dpsi, d2psi, 0.0, hi);
  return {lam, -detail::psi_ext(model, lam, 0)};
}

PhiRoots phi_roots(const LevyModel& model, double q) {
  if (!std::isfinite(q)) throw DomainError("phi_roots: q must be finite");
  const double slope0 = detail::psi_ext(model, 0.0, 1);
  auto upper_root = [&](double lo) {
    double hi = expand_until(std::max(1.0, 2.0 * lo),
                             [&](double h) { return detail::psi_ext(model, h, 0) > q; });
    return root_of_psi(model, q, lo, hi);
  };

  if (slope0 >= 0.0) {
    if (q < 0.0) throw RegimeError("phi_roots: psi'(0+) >= 0, no root for q < 0");
    if (q == 0.0) return {0.0, 0.0};
    double r = upper_root(0.0);
    return {r, r};
  }

  const auto [lam_star, q_star] = critical_point(model);
  if (q <= -q_star) {
    if (q < -q_star - kCriticalTolerance * std::max(1.0, q_star))
      throw DomainError("phi_roots: q < -q_star, psi(lambda) = q has no real root");
    return {lam_star, lam_star};
  }
  const double plus = upper_root(lam_star);
  if (q > 0.0) return {plus, plus};
  const double minus = q == 0.0 ? 0.0 : root_of_psi(model, q, 0.0, lam_star);
  return {minus, plus};
}

LevyModel esscher_tilt(const LevyModel& model, double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw ArgumentError("esscher_tilt: c must be >= 0");
  if (c == 0.0) return model;
  std::vector<JumpComponent> jumps;
  jumps.reserve(model.jumps().size());
  for (const auto& j : model.jumps())
    jumps.push_back({j.intensity * j.rate / (j.rate + c), j.rate + c});
  return LevyModel(model.drift() + model.gaussian_sq() * c, model.gaussian_sq(), std::move(jumps));
}

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::Subcritical: return "Subcritical";
    case Regime::Critical: return "Critical";
    case Regime::NoAlmostSureExtinction: return "NoAlmostSureExtinction";
    case Regime::DriftNonNegative: return "DriftNonNegative";
  }
  return "Unknown";
}

double RegimeReport::tail_exponent() const noexcept {
  if (regime != Regime::Subcritical) return kNaN;
  return phi_plus / phi_minus;
}

RegimeReport classify_regime(const LevyModel& model, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw ArgumentError("classify_regime: beta must be > 0");
  RegimeReport r{beta, Regime::DriftNonNegative, kNaN, kNaN, kNaN, kNaN, std::nullopt};
  if (detail::psi_ext(model, 0.0, 1) >= 0.0) return r;

  const auto cp = critical_point(model);
  r.lambda_star = cp.lambda_star;
  r.q_star = cp.q_star;
  if (std::abs(beta - cp.q_star) <= kCriticalTolerance) {
    r.regime = Regime::Critical;
    r.phi_minus = r.phi_plus = cp.lambda_star;
  } else if (beta < cp.q_star) {
    r.regime = Regime::Subcritical;
    const auto roots = phi_roots(model, -beta);
    r.phi_minus = roots.minus;
    r.phi_plus = roots.plus;
    r.gamma_index = static_cast<int>(std::floor(roots.plus / roots.minus));
  } else {
    r.regime = Regime::NoAlmostSureExtinction;
  }
  return r;
}

CriticalPoint require_extinction(const LevyModel& model, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ArgumentError("beta must be > 0");
  if (detail::psi_ext(model, 0.0, 1) >= 0.0)
    throw RegimeError("psi'(0+) >= 0: the branching process does not die out");
  const auto cp = critical_point(model);
  if (beta > cp.q_star + kCriticalTolerance)
    throw RegimeError("beta > q_star: the branching process does not die out");
  return cp;
}

}  // namespace snlevy
