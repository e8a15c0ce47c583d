#pragma once

#include "snlevy/branching_sim.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace snlevy {

struct SurvivalCurve {
  std::vector<std::int64_t> grid;
  /// Empirical P(Z >= n).
  std::vector<double> surv;
  /// Wilson 95% bounds.
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  /// Number of samples with Z >= n.
  std::vector<std::int64_t> count;
  std::int64_t sample_size = 0;
  /// Thresholds above this are dominated by censoring and never fitted.
  std::int64_t max_reliable = std::numeric_limits<std::int64_t>::max();
};

/// Censored replicates count as Z >= cap/2, so surv is a lower bound beyond
/// cap/2. Throws ArgumentError on an empty dataset or a bad grid.
SurvivalCurve survival_curve(const Dataset& dataset, std::span<const std::int64_t> grid);
SurvivalCurve survival_curve(std::span<const std::int64_t> samples,
                             std::span<const std::int64_t> grid);

/// Distinct integers round(lo * (hi/lo)^(k/(points-1))).
std::vector<std::int64_t> log_grid(std::int64_t lo, std::int64_t hi, int points);

struct FitRange {
  double lo;
  double hi;
};

struct TailFitReport {
  /// Slope magnitude (tail exponent, or decay rate for max_decay).
  double exponent = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double prefactor = 0.0;
  /// max/min over the range of the tail divided by its fitted shape.
  double flatness_ratio = 1.0;
  double fit_lo = 0.0;
  double fit_hi = 0.0;
  int points_used = 0;
};

/// Minimum number of occupied thresholds and samples per threshold for a fit.
inline constexpr int kMinFitPoints = 5;
inline constexpr std::int64_t kMinFitCount = 50;

/// Weighted least squares of log surv on log n. The CI accounts for the
/// correlation between thresholds of one curve. Throws FitError when fewer
/// than kMinFitPoints thresholds are usable.
TailFitReport tail_slope(const SurvivalCurve& curve, FitRange range);

/// g(n) = n ln^2(n) surv(n): flatness_ratio = max g / min g, prefactor = geometric
/// mean of g. exponent and CI come from the log-log fit.
TailFitReport critical_scaling(const SurvivalCurve& curve, FitRange range);

/// Weighted geometric mean of surv(n) n^exponent over the range, for a known
/// exponent. flatness_ratio as in critical_scaling.
TailFitReport tail_prefactor(const SurvivalCurve& curve, FitRange range, double exponent);

enum class MaxMode { Subcritical, Critical };

/// Decay rate of P(M >= x): slope of log P vs x (subcritical) or of
/// log(x P) vs x (critical), on the given x grid restricted to the range.
/// Unweighted least squares; the CI still uses the correlated binomial errors.
TailFitReport max_decay(const Dataset& dataset, std::span<const double> x_grid, MaxMode mode);

struct HillEstimate {
  double alpha;
  double std_error;
  std::int64_t k;
};

/// Hill estimator from the k largest samples.
HillEstimate hill_estimator(std::span<const std::int64_t> samples, std::int64_t k);

/// Integer samples with P(Z >= n) = n^-alpha for every n >= 1.
std::vector<std::int64_t> synthetic_pareto(double alpha, std::int64_t count, std::uint64_t seed);
/// Integer samples with P(Z >= n) = 1 / (n ln^2 n) for n >= 3 and P(Z >= 2) = 1.
std::vector<std::int64_t> synthetic_critical(std::int64_t count, std::uint64_t seed);

}  // namespace snlevy
