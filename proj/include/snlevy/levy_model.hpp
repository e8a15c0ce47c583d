#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace snlevy {

/// Exponential jump component: jumps of size -Exp(rate) arriving at `intensity`,
/// i.e. Levy density intensity * rate * exp(rate * x) on x < 0.
struct JumpComponent {
  double intensity;
  double rate;

  friend bool operator==(const JumpComponent&, const JumpComponent&) = default;
};

/// Spectrally negative Levy process: Brownian motion with drift plus a finite
/// mixture of exponential negative jumps.
///
/// The stored drift is the finite-activity (uncompensated) drift, so that
///
///   psi(lambda) = drift * lambda + gaussian_sq / 2 * lambda^2
///                 + sum_i intensity_i * (rate_i / (rate_i + lambda) - 1).
///
/// The drift in the compensated Levy-Khintchine form (small jumps on (-1, 0)
/// compensated) is available through compensated_drift().
class LevyModel {
 public:
  /// Throws ArgumentError unless gaussian_sq > 0 and every jump component has
  /// finite, strictly positive intensity and rate.
  LevyModel(double drift, double gaussian_sq, std::vector<JumpComponent> jumps = {});

  double drift() const noexcept { return drift_; }
  double gaussian_sq() const noexcept { return gaussian_sq_; }
  const std::vector<JumpComponent>& jumps() const noexcept { return jumps_; }

  double total_jump_intensity() const noexcept;

  /// Drift coefficient d of the compensated representation
  /// d*l + s^2/2*l^2 + int (e^{lx} - 1 - l x 1{|x|<1}) nu(dx).
  double compensated_drift() const noexcept;

  friend bool operator==(const LevyModel&, const LevyModel&) = default;

 private:
  double drift_;
  double gaussian_sq_;
  std::vector<JumpComponent> jumps_;
};

/// Laplace exponent psi and its derivatives up to order 3.
/// Throws DomainError for lam < 0 and ArgumentError for order outside 0..3.
double psi(const LevyModel& model, double lam, int order = 0);

struct PhiRoots {
  double minus;
  double plus;
};

/// Smallest and largest non-negative solutions of psi(lambda) = q.
///
/// For q > 0 the non-negative solution is unique and both fields hold it.
/// Throws DomainError if q < -q_star (no real root) and RegimeError if q < 0
/// while psi'(0+) >= 0.
PhiRoots phi_roots(const LevyModel& model, double q);

struct CriticalPoint {
  double lambda_star;
  double q_star;
};

/// Minimiser lambda_star of psi and q_star = -psi(lambda_star).
/// Throws RegimeError when psi'(0+) >= 0.
CriticalPoint critical_point(const LevyModel& model);

/// Model under the exponential change of measure with parameter c >= 0:
/// psi_c(lambda) = psi(lambda + c) - psi(c).
LevyModel esscher_tilt(const LevyModel& model, double c);

enum class Regime { Subcritical, Critical, NoAlmostSureExtinction, DriftNonNegative };

std::string_view to_string(Regime regime) noexcept;

struct RegimeReport {
  double beta = 0.0;
  Regime regime = Regime::DriftNonNegative;
  // NaN when the quantity is undefined for the regime.
  double lambda_star;
  double q_star;
  double phi_minus;
  double phi_plus;
  std::optional<int> gamma_index;  // floor(phi_plus / phi_minus), subcritical only

  /// Tail exponent phi_plus / phi_minus (subcritical), NaN otherwise.
  double tail_exponent() const noexcept;
};

/// Extinction regime of the branching process with branching rate beta.
/// |beta - q_star| <= kCriticalTolerance counts as critical.
RegimeReport classify_regime(const LevyModel& model, double beta);

inline constexpr double kCriticalTolerance = 1e-12;

/// Tests q_star against beta with kCriticalTolerance; throws RegimeError when
/// beta exceeds q_star or psi'(0+) >= 0. Returns the critical point.
CriticalPoint require_extinction(const LevyModel& model, double beta);

namespace detail {

/// psi^(order) extended to real lambda != -rate_i (no domain check).
double psi_ext(const LevyModel& model, double lam, int order);

/// Solves f(x) = 0 on [lo, hi] given f(lo) and f(hi) of opposite sign, then
/// polishes with a safeguarded Newton step when df is supplied.
template <class F, class DF>
double solve_bracketed(F&& f, DF&& df, double lo, double hi);

}  // namespace detail

}  // namespace snlevy

#include "snlevy/detail/roots.ipp"
