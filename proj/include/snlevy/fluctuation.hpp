#pragma once

#include "snlevy/levy_model.hpp"
#include "snlevy/scale_fn.hpp"

#include <optional>
#include <vector>

namespace snlevy {

/// Two-sided exit transforms of the strip (0, x) started from a, at rate beta:
///   up   = E_a[exp(beta tau_x^+) ; tau_x^+ < tau_0^-] = W^(-beta)(a) / W^(-beta)(x)
///   down = E_a[exp(beta tau_0^-) ; tau_0^- < tau_x^+] = E_a[Z_{0<x}]
struct ExitFunctionals {
  double up;
  double down;
};

/// Law of the undershoot L at first passage below 0: an atom `creep_atom` at 0
/// plus a density on (-inf, 0) that is a mixture of exponentials,
/// sum_k weight_k * rate_k * exp(rate_k z).
struct UndershootLaw {
  struct Component {
    double rate;
    double weight;
  };
  double creep_atom = 0.0;
  std::vector<Component> components;

  double total_mass() const noexcept;
  /// E[exp(-s L)]; requires s < every component rate.
  double transform(double s) const;
  /// Probability that the first passage below 0 happens by a jump.
  double jump_mass() const noexcept { return total_mass() - creep_atom; }
};

/// First and second moments of the absorbed progeny for one (model, beta).
/// Construction checks beta <= q_star and caches the scale function at -beta.
class ProgenyMoments {
 public:
  ProgenyMoments(const LevyModel& model, double beta);

  double beta() const noexcept { return beta_; }
  const ScaleFunction& scale() const noexcept { return scale_; }

  /// E_a[Z_0] = Z^(-beta)(a) + beta / Phi_+(-beta) W^(-beta)(a), evaluated
  /// with the dominant exponential cancelled analytically.
  double mean(double a) const noexcept;
  double up(double a, double x) const noexcept;
  /// E_a[Z_{0<x}] for 0 <= a <= x.
  double down(double a, double x) const noexcept;
  /// Density of int_0^inf exp(beta r) P_a(L_r in dy, r < tau) dr on (0, x).
  double resolvent(double a, double x, double y) const noexcept;
  /// E_a[Z_{0<x}^2] from the n = 2 moment recursion.
  double second_moment(double a, double x) const;

 private:
  double beta_;
  ScaleFunction scale_;
};

/// Throws ArgumentError unless 0 < a < x; RegimeError when beta > q_star.
ExitFunctionals exit_functionals(const LevyModel& model, double beta, double a, double x);

/// E_a[Z_0] (no barrier) or E_a[Z_{0<x}] (barrier x > a).
double mean_progeny(const LevyModel& model, double beta, double a,
                    std::optional<double> barrier = std::nullopt);

/// E_a[Z_0] via the exponential change of measure at c = Phi_-(-beta):
/// exp(c a) E^c_a[exp(-c L_{tau_0^-})].
double mean_progeny_tilted(const LevyModel& model, double beta, double a);

/// Killed resolvent density at level q on the strip (0, x):
/// W(a) W(x-y) / W(x) - 1{a >= y} W(a-y), zero for y outside (0, x).
double resolvent_density(const LevyModel& model, double q, double a, double x, double y);

/// Undershoot law under P_a for a > 0.
UndershootLaw undershoot_law(const LevyModel& model, double a);

/// E^c_a[exp(-c L_{tau_0^-})] under the model tilted by c.
double tilted_undershoot_transform(const LevyModel& model, double c, double a);

/// H(upper, start) = W_{lambda*}(upper) exp(-lambda* start) E_start[Z_{0<upper}]
/// at the critical branching rate beta = q_star. Requires 0 < start < upper.
double h_function(const LevyModel& model, double upper, double start);

/// Same quantity through the tilted undershoot transforms:
/// W_{l*}(upper) T(start) - W_{l*}(start) T(upper), T(a) = E^{l*}_a[exp(-l* L)].
double h_function_tilted(const LevyModel& model, double upper, double start);

/// E_a[Z_{0<x}^2] = E_a[Z_{0<x}] + 2 beta int_0^x E_y[Z_{0<x}]^2 r(a, y) dy.
double second_moment_barrier(const LevyModel& model, double beta, double a, double x);

}  // namespace snlevy
