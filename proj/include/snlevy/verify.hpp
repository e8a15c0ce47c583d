#pragma once

#include "snlevy/levy_model.hpp"
#include "snlevy/tail_estimator.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace snlevy::verify {

inline constexpr std::string_view kCriteriaVersion = "1";

/// One row of the acceptance table. Tolerances and sample sizes live here and
/// nowhere else.
struct Criterion {
  int id;
  std::string_view name;
  std::string_view statement;
  double tolerance;
  std::int64_t replicates_quick;  // 0: skipped in quick mode
  std::int64_t replicates_full;
  double range_lo;
  double range_hi;
};

std::span<const Criterion> criteria();
/// Throws ArgumentError for an unknown id.
const Criterion& criterion(int id);

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  bool skipped = false;
  double measured = 0.0;
  double predicted = 0.0;
  double tolerance = 0.0;
  std::string detail;
  double seconds = 0.0;
};

enum class Level { Quick, Full };

struct Options {
  Level level = Level::Quick;
  std::uint64_t seed = 20240611;
  unsigned workers = 0;
};

/// Branching rates used by the suite: 0.9 q_star and q_star.
double subcritical_beta(const LevyModel& model);
double critical_beta(const LevyModel& model);

/// Reduced results of one large simulation campaign at a = 1.
struct TailStudy {
  double beta = 0.0;
  std::int64_t replicates = 0;
  double censored_fraction = 0.0;
  bool slope_ok = false;
  TailFitReport slope;
  bool scaling_ok = false;
  TailFitReport scaling;
  bool max_ok = false;
  TailFitReport max;
  std::string error;
  double seconds = 0.0;
};

TailStudy run_tail_study(const LevyModel& model, double beta, bool critical, std::int64_t replicates,
                         std::uint64_t seed, unsigned workers);

CheckResult check_roots(std::span<const LevyModel> models);
CheckResult check_scale_oracle(std::span<const LevyModel> models);
CheckResult check_tilt(std::span<const LevyModel> models);
CheckResult check_mean_progeny(const LevyModel& model, const Options& opt);
CheckResult check_moments(const LevyModel& model, const Options& opt);
CheckResult check_resolvent(const LevyModel& model, const Options& opt);
CheckResult check_tail_exponent(const LevyModel& model, const TailStudy& sub);
CheckResult check_critical_scaling(const TailStudy& crit, const Options& opt);
CheckResult check_max_decay(const LevyModel& model, const TailStudy& sub, const TailStudy& crit);
CheckResult check_proportionality(const LevyModel& model, const Options& opt);
CheckResult check_chi(std::span<const LevyModel> models, const Options& opt);
CheckResult check_scale_difference(std::span<const LevyModel> models);
CheckResult check_determinism(const LevyModel& model, const Options& opt);

/// Whole suite on one model. Quick level skips criteria 7 to 10.
/// Requires psi'(0+) < 0 (RegimeError otherwise).
std::vector<CheckResult> run_verification(const LevyModel& model, const Options& opt);

/// One line: "[PASS] 7 tail-exponent measured=... predicted=... tol=... (detail)".
std::string format_line(const CheckResult& r);

}  // namespace snlevy::verify
