#pragma once

#include "snlevy/levy_model.hpp"

#include <span>
#include <vector>

namespace snlevy {

/// One root theta of psi(lambda) = q together with its partial-fraction
/// coefficients: the scale function picks up (c0 + c1 * x) * exp(theta * x).
/// c1 is non-zero only for the double root at q = -q_star.
struct ScaleTerm {
  double theta;
  int multiplicity;
  double c0;
  double c1;
};

/// All roots of psi(lambda) = q after clearing the jump denominators, i.e. the
/// zeros of a polynomial of degree 2 + (number of distinct jump rates).
///
/// For exponential jump mixtures every root is real: one lies left of the
/// smallest pole -rate_max, one between each pair of consecutive poles, and two
/// (Phi_-(q), Phi_+(q), or one negative root and Phi_+(q) when q > 0) right of
/// the pole -rate_min.
struct RootSystem {
  double q;
  std::vector<ScaleTerm> terms;  // ascending theta

  /// Polynomial degree, counting multiplicity.
  int degree() const noexcept;
  /// Partial-fraction reconstruction of 1 / (psi(lambda) - q).
  double reconstruct(double lam) const noexcept;
  /// Largest root, Phi_+(q).
  double largest() const noexcept { return terms.back().theta; }
};

/// Roots closer than this are merged into a double root.
inline constexpr double kDoubleRootGap = 1e-7;

/// Throws DomainError when q < -q_star.
RootSystem psi_roots_all(const LevyModel& model, double q);

/// Closed-form scale functions W^(q), Z^(q) of one (model, q) pair, valid for
/// every q >= -q_star including the analytic extension to negative q.
class ScaleFunction {
 public:
  ScaleFunction(const LevyModel& model, double q);

  double q() const noexcept { return roots_.q; }
  const RootSystem& roots() const noexcept { return roots_; }

  /// W^(q)(x); zero for x < 0.
  double w(double x) const noexcept;
  /// exp(-c x) W^(q)(x), evaluated term by term.
  double w_scaled(double x, double c) const noexcept;
  /// dW^(q)/dx for x > 0.
  double w_prime(double x) const noexcept;
  /// Z^(q)(x) = 1 + q int_0^x W^(q); equal to 1 for x <= 0.
  double z(double x) const noexcept;
  /// int_0^x exp(kappa s) W^(q)(s) ds for x >= 0.
  double exp_weighted_integral(double kappa, double x) const noexcept;

 private:
  RootSystem roots_;
};

double w_q(const LevyModel& model, double q, double x);
double z_q(const LevyModel& model, double q, double x);

struct InversionOptions {
  /// Abscissa shift; must exceed Phi_+(q). Defaults to Phi_+(q) + 1.
  double shift = -1.0;
  /// Talbot contour nodes.
  int nodes = 24;
};

/// W^(q)(x) by numerical inversion of lambda -> 1 / (psi(lambda) - q) along a
/// fixed Talbot contour placed right of Phi_+(q). Independent of the closed form.
/// Throws ArgumentError when x <= 0 or the shift does not exceed Phi_+(q).
double w_numeric(const LevyModel& model, double q, double x, InversionOptions options = {});

/// Scale function of the tilted model: exp(-c x) W^(psi(c))(x).
double tilted_w(const LevyModel& model, double c, double x);

struct ConcavityReport {
  bool is_concave;
  /// Largest second difference on the grid (positive means a convex kink).
  double worst_violation;
};

/// Checks concavity of x -> exp(-lambda_star x) W^(-q_star)(x) on a grid.
/// Grid must be strictly increasing with at least 3 points.
ConcavityReport concavity_check(const LevyModel& model, std::span<const double> x_grid);

inline constexpr double kConcavityTolerance = 1e-9;

struct AsymptoticConstants {
  /// 1 / psi'(Phi_+(-beta)): W^(-beta)(z) ~ limW_plus_coeff * exp(Phi_+(-beta) z).
  /// NaN in the critical regime.
  double limW_plus_coeff;
  /// 2 / psi''(lambda_star): exp(-lambda_star z) W^(-q_star)(z) ~ limWq_slope * z.
  double limWq_slope;
  /// Limit of the tilted undershoot transform (chi_beta or chi_{q_star}).
  double chi;
  /// -2 psi'''(lambda_star) / (3 psi''(lambda_star)^2), per unit shift y.
  double shift_integral;
};

/// Throws RegimeError outside the subcritical and critical regimes.
AsymptoticConstants asym_constants(const LevyModel& model, double beta);

}  // namespace snlevy
