#include "snlevy/verify.hpp"

#include "snlevy/branching_sim.hpp"
#include "snlevy/errors.hpp"
#include "snlevy/fluctuation.hpp"
#include "snlevy/io.hpp"
#include "snlevy/rng.hpp"
#include "snlevy/scale_fn.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace snlevy::verify {

namespace {

constexpr Criterion kTable[] = {
    {1, "root-algebra", "|psi(Phi(q)) - q| on q in [-q*, 10]; closed-form critical point", 1e-10, 1, 1, -1.0, 10.0},
    {2, "scale-oracle", "closed-form W vs Talbot inversion, x in [0.1, 10]; Laplace identity to 1e-4", 1e-6, 1, 1, 0.1, 10.0},
    {3, "tilt-identity", "two routes to W_c agree; jump-free critical tilt is 2x/sigma^2", 1e-10, 1, 1, 0.0, 10.0},
    {4, "mean-progeny", "simulated E_1[Z_0] within 3 SE, subcritical and critical", 3.0, 100'000, 100'000, 1.0, 1.0},
    {5, "barrier-moments", "simulated E[Z_0<3], E[Z_0<3^2] within 3 SE; Jensen; R_2 bound", 3.0, 100'000, 100'000, 1.0, 3.0},
    {6, "resolvent", "occupation density on 10 bins of (0, 2) within 3 SE, q = 0", 3.0, 100'000, 100'000, 0.0, 2.0},
    {7, "tail-exponent", "log-log slope of P(Z_0 >= n), n in [20, 500], within 10% of Phi+/Phi-", 0.10, 0, 10'000'000, 20.0, 500.0},
    {8, "critical-scaling", "flatness of n ln^2 n P(Z_0 >= n) on [50, 2000] <= 2; Pareto(2) control > 2", 2.0, 0, 10'000'000, 50.0, 2000.0},
    {9, "max-decay", "decay rate of P(M >= x) on [3, 8] within 5% of Phi+(-beta) and lambda*", 0.05, 0, 10'000'000, 3.0, 8.0},
    {10, "a-proportionality", "tail prefactor / W(a) for a in {0.5, 1, 2}, fitted as in criteria 7 and 8: relative spread <= 25%", 0.25, 0, 1'000'000, 0.5, 2.0},
    {11, "chi-constants", "tilted undershoot transform at a = 20 within 3 SE of chi; creeping gives 1", 3.0, 100'000, 100'000, 20.0, 20.0},
    {12, "scale-difference", "W_l*(50) - W_l*(50 - y) within 2% of 2y/psi''; bound non-negative", 0.02, 1, 1, 0.0, 50.0},
    {13, "determinism", "byte-identical datasets with 1, 4 and 8 workers", 0.0, 20'000, 20'000, 1.0, 1.0},
};

constexpr double kLaplaceTolerance = 1e-4;
// thresholds per log grid in the slope (7) and scaling (8) fits
constexpr int kSlopePoints = 12;
constexpr int kScalingPoints = 15;

constexpr double kInfinity = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

struct Stopwatch {
  Clock::time_point t0 = Clock::now();
  double seconds() const { return std::chrono::duration<double>(Clock::now() - t0).count(); }
};

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

CheckResult start(int id) {
  const auto& c = criterion(id);
  CheckResult r;
  r.id = id;
  r.name = std::string(c.name);
  r.tolerance = c.tolerance;
  return r;
}

std::uint64_t seed_for(const Options& opt, int id) {
  return mix64(opt.seed + static_cast<std::uint64_t>(id));
}

std::int64_t reps(const Options& opt, int id) {
  const auto& c = criterion(id);
  return opt.level == Level::Full ? c.replicates_full : c.replicates_quick;
}

bool has_minimum(const LevyModel& m) { return detail::psi_ext(m, 0.0, 1) < 0.0; }

double integrate(const auto& f, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-12);
}

double zscore(double est, double se, double truth) {
  return se > 0.0 ? std::abs(est - truth) / se : (est == truth ? 0.0 : kInfinity);
}

}  // namespace

std::span<const Criterion> criteria() { return kTable; }

const Criterion& criterion(int id) {
  for (const auto& c : kTable)
    if (c.id == id) return c;
  throw ArgumentError("unknown criterion " + std::to_string(id));
}

double subcritical_beta(const LevyModel& model) { return 0.9 * critical_point(model).q_star; }
double critical_beta(const LevyModel& model) { return critical_point(model).q_star; }

CheckResult check_roots(std::span<const LevyModel> models) {
  Stopwatch sw;
  auto r = start(1);
  double worst = 0.0, crit_err = 0.0;
  bool crit_checked = false;
  for (const auto& m : models) {
    double q_lo = 0.0;
    if (has_minimum(m)) {
      const auto cp = critical_point(m);
      q_lo = -cp.q_star;
      worst = std::max(worst, std::abs(detail::psi_ext(m, cp.lambda_star, 1)));
      if (m.jumps().empty()) {
        // Brownian motion with drift: lambda* = -d / sigma^2, q* = d^2 / (2 sigma^2)
        const double l = -m.drift() / m.gaussian_sq();
        const double q = m.drift() * m.drift() / (2.0 * m.gaussian_sq());
        crit_err = std::max({crit_err, std::abs(cp.lambda_star - l), std::abs(cp.q_star - q)});
        crit_checked = true;
      }
    }
    constexpr int kSteps = 60;
    for (int k = 0; k <= kSteps; ++k) {
      const double q = k == kSteps ? 10.0 : q_lo + (10.0 - q_lo) * k / kSteps;
      const auto roots = phi_roots(m, q);
      for (const double lam : {roots.minus, roots.plus})
        worst = std::max(worst, std::abs(detail::psi_ext(m, lam, 0) - q));
    }
    const auto roots0 = phi_roots(m, 0.0);
    worst = std::max(worst, std::abs(detail::psi_ext(m, roots0.plus, 0)));
  }
  r.measured = worst;
  r.predicted = 0.0;
  r.passed = worst <= r.tolerance && (!crit_checked || crit_err <= 1e-12);
  r.detail = "max |psi(Phi)-q| = " + num(worst, 3) +
             (crit_checked ? "; closed-form critical point error " + num(crit_err, 3) : "");
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_scale_oracle(std::span<const LevyModel> models) {
  Stopwatch sw;
  auto r = start(2);
  double worst = 0.0, worst_laplace = 0.0;
  for (const auto& m : models) {
    std::vector<double> qs{0.0, 1.0};
    if (has_minimum(m)) {
      qs.push_back(-critical_beta(m));
      qs.push_back(-subcritical_beta(m));
    }
    for (const double q : qs) {
      const ScaleFunction sf(m, q);
      for (int k = 0; k < 30; ++k) {
        const double x = 0.1 * std::pow(100.0, k / 29.0);
        const double w = sf.w(x);
        worst = std::max(worst, std::abs(w - w_numeric(m, q, x)) / std::abs(w));
      }
      if (has_minimum(m) && q == -critical_beta(m)) continue;
      const double phi = sf.roots().largest();
      for (const double gap : {0.5, 1.0, 2.0}) {
        const double lam = phi + gap;
        // tail beyond x_max is below 1e-10 relative
        const double x_max = std::log(1e10) / gap + 10.0;
        double total = 0.0;
        for (double lo = 0.0; lo < x_max; lo += 1.0)
          total += integrate([&](double x) { return std::exp(-lam * x) * sf.w(x); }, lo, lo + 1.0);
        const double exact = 1.0 / (detail::psi_ext(m, lam, 0) - q);
        worst_laplace = std::max(worst_laplace, std::abs(total - exact) / exact);
      }
    }
  }
  r.measured = worst;
  r.passed = worst <= r.tolerance && worst_laplace <= kLaplaceTolerance;
  r.detail = "max rel err vs inversion " + num(worst, 3) + "; Laplace identity max rel err " +
             num(worst_laplace, 3);
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_tilt(std::span<const LevyModel> models) {
  Stopwatch sw;
  auto r = start(3);
  double worst = 0.0, linear_err = 0.0;
  std::string concavity;
  bool ok = true;
  for (const auto& m : models) {
    if (!has_minimum(m)) continue;
    const auto cp = critical_point(m);
    for (const double c : {0.25 * cp.lambda_star, 0.5 * cp.lambda_star, cp.lambda_star,
                           2.0 * cp.lambda_star}) {
      const ScaleFunction tilted(esscher_tilt(m, c), 0.0);
      for (int k = 0; k <= 40; ++k) {
        const double x = 0.25 * k;
        const double a = tilted_w(m, c, x);
        const double b = tilted.w(x);
        worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
      }
    }
    std::vector<double> grid;
    for (int k = 0; k <= 20; ++k) grid.push_back(0.5 * k);
    const auto conc = concavity_check(m, grid);
    if (m.jumps().empty()) {
      for (const double x : grid)
        linear_err = std::max(linear_err, std::abs(tilted_w(m, cp.lambda_star, x) -
                                                   2.0 * x / m.gaussian_sq()));
      ok = ok && conc.is_concave;
    }
    concavity += std::string(concavity.empty() ? "" : ", ") + (conc.is_concave ? "concave" : "not concave") +
                 " (worst " + num(conc.worst_violation, 3) + ")";
  }
  r.measured = worst;
  r.passed = ok && worst <= r.tolerance && linear_err <= r.tolerance;
  r.detail = "routes differ by " + num(worst, 3) + "; |W_l*(x) - 2x/sigma^2| = " +
             num(linear_err, 3) + "; concavity: " + concavity;
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_mean_progeny(const LevyModel& model, const Options& opt) {
  Stopwatch sw;
  auto r = start(4);
  const auto& c = criterion(4);
  std::ostringstream det;
  double worst = 0.0;
  for (const bool crit : {false, true}) {
    SimConfig cfg;
    cfg.beta = crit ? critical_beta(model) : subcritical_beta(model);
    cfg.start = c.range_lo;
    cfg.replicates = reps(opt, 4);
    cfg.master_seed = seed_for(opt, 4) + (crit ? 1 : 0);
    cfg.workers = opt.workers;
    const auto s = summarize(simulate_batch(model, cfg));
    const double truth = mean_progeny(model, cfg.beta, cfg.start);
    const double z = zscore(s.mean_z0, s.se_z0, truth);
    worst = std::max(worst, z);
    det << (crit ? "; critical " : "subcritical ") << "mean " << num(s.mean_z0) << " +- "
        << num(s.se_z0, 3) << " vs " << num(truth) << " (z=" << num(z, 3)
        << ", censored " << num(s.censored_fraction, 3) << ")";
    if (!crit) r.predicted = truth;
    if (!crit) r.measured = s.mean_z0;
  }
  r.passed = worst <= r.tolerance;
  r.detail = det.str() + "; worst z " + num(worst, 3);
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_moments(const LevyModel& model, const Options& opt) {
  Stopwatch sw;
  auto r = start(5);
  const auto& c = criterion(5);
  SimConfig cfg;
  cfg.beta = subcritical_beta(model);
  cfg.start = c.range_lo;
  cfg.barrier = c.range_hi;
  cfg.replicates = reps(opt, 5);
  cfg.master_seed = seed_for(opt, 5);
  cfg.workers = opt.workers;
  const auto s = summarize(simulate_batch(model, cfg));
  const ProgenyMoments pm(model, cfg.beta);
  const double m1 = pm.down(cfg.start, *cfg.barrier);
  const double m2 = pm.second_moment(cfg.start, *cfg.barrier);
  const double z1 = zscore(s.mean_z0, s.se_z0, m1);
  const double z2 = zscore(s.mean_z0_sq, s.se_z0_sq, m2);
  const bool jensen = m2 >= m1 * m1 && s.mean_z0_sq >= s.mean_z0 * s.mean_z0;
  // R_2(y) = 2 E_y[Z]^2 against 2^3 E_y[Z] E_y[Z]
  bool rn = true;
  for (int k = 1; k < 30; ++k) {
    const double y = *cfg.barrier * k / 30.0;
    const double e = pm.down(y, *cfg.barrier);
    rn = rn && 2.0 * e * e <= 8.0 * e * e;
  }
  r.measured = std::max(z1, z2);
  r.predicted = 0.0;
  r.passed = z1 <= r.tolerance && z2 <= r.tolerance && jensen && rn;
  r.detail = "E[Z] " + num(s.mean_z0) + " vs " + num(m1) + " (z=" + num(z1, 3) + "); E[Z^2] " +
             num(s.mean_z0_sq) + " vs " + num(m2) + " (z=" + num(z2, 3) + "); Jensen " +
             (jensen ? "ok" : "violated") + "; R_2 bound " + (rn ? "ok" : "violated");
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_resolvent(const LevyModel& model, const Options& opt) {
  Stopwatch sw;
  auto r = start(6);
  const auto& c = criterion(6);
  const double a = 1.0, x = c.range_hi;
  SimConfig cfg;
  cfg.beta = 0.0;
  cfg.start = a;
  cfg.barrier = x;
  cfg.replicates = reps(opt, 6);
  cfg.master_seed = seed_for(opt, 6);
  cfg.workers = opt.workers;
  std::vector<double> edges;
  for (int k = 0; k <= 10; ++k) edges.push_back(x * k / 10.0);
  const auto est = simulate_occupation(model, cfg, edges);

  const ScaleFunction sf(model, 0.0);
  const double wa = sf.w(a), wx = sf.w(x);
  auto density = [&](double y) { return wa * sf.w(x - y) / wx - (a >= y ? sf.w(a - y) : 0.0); };
  double worst = 0.0;
  std::ostringstream det;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double lo = edges[k], hi = edges[k + 1];
    double mass = 0.0;
    if (lo < a && a < hi)
      mass = integrate(density, lo, a) + integrate(density, a, hi);
    else
      mass = integrate(density, lo, hi);
    const double truth = mass / (hi - lo);
    const double z = zscore(est.density[k], est.std_error[k], truth);
    worst = std::max(worst, z);
    det << (k ? " " : "") << num(z, 2);
  }
  r.measured = worst;
  r.passed = worst <= r.tolerance;
  r.detail = "per-bin z: " + det.str();
  r.seconds = sw.seconds();
  return r;
}

TailStudy run_tail_study(const LevyModel& model, double beta, bool critical,
                         std::int64_t replicates, std::uint64_t seed, unsigned workers) {
  Stopwatch sw;
  TailStudy st;
  st.beta = beta;
  st.replicates = replicates;
  SimConfig cfg;
  cfg.beta = beta;
  cfg.start = 1.0;
  cfg.replicates = replicates;
  cfg.master_seed = seed;
  cfg.workers = workers;
  const auto ds = simulate_batch(model, cfg);
  st.censored_fraction = summarize(ds).censored_fraction;

  std::string errors;
  auto attempt = [&](auto&& fn, bool& ok, TailFitReport& out) {
    try {
      out = fn();
      ok = true;
    } catch (const FitError& e) {
      errors += std::string(errors.empty() ? "" : "; ") + e.what();
    }
  };
  const auto& c7 = criterion(7);
  const auto& c8 = criterion(8);
  const auto& c9 = criterion(9);
  attempt([&] {
    const auto g = log_grid(static_cast<std::int64_t>(c7.range_lo), static_cast<std::int64_t>(c7.range_hi), kSlopePoints);
    return tail_slope(survival_curve(ds, g), {c7.range_lo, c7.range_hi});
  }, st.slope_ok, st.slope);
  if (critical) {
    attempt([&] {
      const auto g = log_grid(static_cast<std::int64_t>(c8.range_lo), static_cast<std::int64_t>(c8.range_hi), kScalingPoints);
      return critical_scaling(survival_curve(ds, g), {c8.range_lo, c8.range_hi});
    }, st.scaling_ok, st.scaling);
  }
  attempt([&] {
    std::vector<double> xs;
    for (int k = 0; k <= 10; ++k) xs.push_back(c9.range_lo + (c9.range_hi - c9.range_lo) * k / 10.0);
    return max_decay(ds, xs, critical ? MaxMode::Critical : MaxMode::Subcritical);
  }, st.max_ok, st.max);
  st.error = errors;
  st.seconds = sw.seconds();
  return st;
}

CheckResult check_tail_exponent(const LevyModel& model, const TailStudy& sub) {
  auto r = start(7);
  const auto roots = phi_roots(model, -sub.beta);
  r.predicted = roots.plus / roots.minus;
  r.seconds = sub.seconds;
  if (!sub.slope_ok) {
    r.detail = "fit failed: " + sub.error;
    return r;
  }
  r.measured = sub.slope.exponent;
  const double rel = std::abs(r.measured / r.predicted - 1.0);
  r.passed = rel <= r.tolerance;
  r.detail = "slope " + num(r.measured) + " CI [" + num(sub.slope.ci_lo, 4) + ", " +
             num(sub.slope.ci_hi, 4) + "] vs " + num(r.predicted) + " (rel " + num(rel, 3) +
             ", " + std::to_string(sub.replicates) + " reps)";
  return r;
}

CheckResult check_critical_scaling(const TailStudy& crit, const Options& opt) {
  Stopwatch sw;
  auto r = start(8);
  const auto& c = criterion(8);
  r.predicted = 1.0;
  double control = 0.0;
  std::string control_note;
  try {
    const auto par = synthetic_pareto(2.0, crit.replicates, seed_for(opt, 8));
    const auto g = log_grid(static_cast<std::int64_t>(c.range_lo), static_cast<std::int64_t>(c.range_hi), kScalingPoints);
    control = critical_scaling(survival_curve(par, g), {c.range_lo, c.range_hi}).flatness_ratio;
  } catch (const FitError& e) {
    control_note = std::string(" (") + e.what() + ")";
  }
  r.seconds = crit.seconds + sw.seconds();
  if (!crit.scaling_ok) {
    r.detail = "fit failed: " + crit.error;
    return r;
  }
  r.measured = crit.scaling.flatness_ratio;
  r.passed = r.measured <= r.tolerance && control > r.tolerance;
  r.detail = "flatness " + num(r.measured, 4) + " over " + std::to_string(crit.scaling.points_used) +
             " thresholds, prefactor " + num(crit.scaling.prefactor, 4) + "; Pareto(2) control " +
             num(control, 4) + control_note + "; censored " + num(crit.censored_fraction, 3);
  return r;
}

CheckResult check_max_decay(const LevyModel& model, const TailStudy& sub, const TailStudy& crit) {
  auto r = start(9);
  r.seconds = 0.0;
  if (!sub.max_ok || !crit.max_ok) {
    r.detail = "fit failed: " + sub.error + " " + crit.error;
    return r;
  }
  const double rate_sub = phi_roots(model, -sub.beta).plus;
  const double rate_crit = critical_point(model).lambda_star;
  const double e1 = std::abs(sub.max.exponent / rate_sub - 1.0);
  const double e2 = std::abs(crit.max.exponent / rate_crit - 1.0);
  r.measured = sub.max.exponent;
  r.predicted = rate_sub;
  r.passed = e1 <= r.tolerance && e2 <= r.tolerance;
  r.detail = "subcritical rate " + num(sub.max.exponent) + " vs " + num(rate_sub) + " (rel " +
             num(e1, 3) + "); critical rate " + num(crit.max.exponent) + " vs " + num(rate_crit) +
             " (rel " + num(e2, 3) + ")";
  return r;
}

CheckResult check_proportionality(const LevyModel& model, const Options& opt) {
  Stopwatch sw;
  auto r = start(10);
  const auto& c = criterion(10);
  const std::int64_t n = reps(opt, 10);
  if (n == 0) {
    r.skipped = true;
    return r;
  }
  std::ostringstream det;
  double worst = 0.0;
  bool ok = true;
  for (const bool crit : {false, true}) {
    const double beta = crit ? critical_beta(model) : subcritical_beta(model);
    const auto roots = phi_roots(model, -beta);
    const double alpha = roots.plus / roots.minus;
    const auto& fc = criterion(crit ? 8 : 7);
    const FitRange range{fc.range_lo, fc.range_hi};
    const auto grid = log_grid(static_cast<std::int64_t>(fc.range_lo), static_cast<std::int64_t>(fc.range_hi),
                               crit ? kScalingPoints : kSlopePoints);
    std::vector<double> ratio;
    int idx = 0;
    for (const double a : {c.range_lo, 1.0, c.range_hi}) {
      SimConfig cfg;
      cfg.beta = beta;
      cfg.start = a;
      cfg.replicates = n;
      cfg.master_seed = seed_for(opt, 10) + static_cast<std::uint64_t>(idx++ + (crit ? 3 : 0));
      cfg.workers = opt.workers;
      const auto curve = survival_curve(simulate_batch(model, cfg), grid);
      try {
        const auto fit = crit ? critical_scaling(curve, range) : tail_prefactor(curve, range, alpha);
        ratio.push_back(fit.prefactor / w_q(model, -beta, a));
      } catch (const FitError& e) {
        ok = false;
        det << "fit failed at a=" << a << ": " << e.what() << "; ";
      }
    }
    if (ratio.size() == 3) {
      const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
      const double mean = (ratio[0] + ratio[1] + ratio[2]) / 3.0;
      const double spread = (*hi - *lo) / mean;
      worst = std::max(worst, spread);
      det << (crit ? "critical" : "subcritical") << " prefactor/W(a) = " << num(ratio[0], 4) << ", "
          << num(ratio[1], 4) << ", " << num(ratio[2], 4) << " (spread " << num(spread, 3) << "); ";
    }
  }
  r.measured = worst;
  r.passed = ok && worst <= r.tolerance;
  r.detail = det.str() + std::to_string(n) + " reps per a";
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_chi(std::span<const LevyModel> models, const Options& opt) {
  Stopwatch sw;
  auto r = start(11);
  const auto& c = criterion(11);
  std::ostringstream det;
  bool ok = true;
  double worst = 0.0;
  for (const auto& m : models) {
    if (!has_minimum(m)) continue;
    const double beta = subcritical_beta(m);
    const auto ac = asym_constants(m, beta);
    if (m.jumps().empty()) {
      const double chi_c = asym_constants(m, critical_beta(m)).chi;
      const bool exact = std::abs(ac.chi - 1.0) <= 1e-12 && std::abs(chi_c - 1.0) <= 1e-12;
      const auto u = simulate_first_passage(m, c.range_lo, phi_roots(m, -beta).minus, 1000,
                                            seed_for(opt, 11), opt.workers);
      const bool creep = std::all_of(u.begin(), u.end(), [](double v) { return v == 0.0; });
      ok = ok && exact && creep;
      det << "jump-free: chi_beta " << num(ac.chi, 15) << ", chi_q* " << num(chi_c, 15)
          << ", undershoots all zero " << (creep ? "yes" : "no") << "; ";
      continue;
    }
    const double tilt = phi_roots(m, -beta).minus;
    const auto u = simulate_first_passage(m, c.range_lo, tilt, reps(opt, 11), seed_for(opt, 11),
                                          opt.workers);
    double s = 0.0, s2 = 0.0;
    for (const double y : u) {
      const double t = std::exp(-tilt * y);
      s += t;
      s2 += t * t;
    }
    const double n = static_cast<double>(u.size());
    const double mean = s / n;
    const double se = std::sqrt(std::max(0.0, s2 / n - mean * mean) / (n - 1.0));
    const double z = zscore(mean, se, ac.chi);
    worst = std::max(worst, z);
    ok = ok && z <= c.tolerance;
    r.measured = mean;
    r.predicted = ac.chi;
    det << "MC " << num(mean) << " +- " << num(se, 3) << " vs chi_beta " << num(ac.chi)
        << " (z=" << num(z, 3) << "); ";
  }
  r.passed = ok;
  r.detail = det.str();
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_scale_difference(std::span<const LevyModel> models) {
  Stopwatch sw;
  auto r = start(12);
  const double x = criterion(12).range_hi;
  std::ostringstream det;
  double worst = 0.0, min_gap = kInfinity, max_scaled = 0.0;
  bool nonneg = true;
  for (const auto& m : models) {
    if (!has_minimum(m)) continue;
    const auto cp = critical_point(m);
    const ScaleFunction sf(m, -cp.q_star);
    auto wt = [&](double v) { return sf.w_scaled(v, cp.lambda_star); };
    const double d2 = detail::psi_ext(m, cp.lambda_star, 2);
    for (const double y : {0.5, 1.0, 2.0}) {
      const double limit = 2.0 * y / d2;
      const double diff = wt(x) - wt(x - y);
      worst = std::max(worst, std::abs(diff / limit - 1.0));
      for (double v = y; v <= x + 1e-12; v += 0.25) {
        const double gap = wt(v) - wt(v - y) - limit;
        // rounding in the difference of two values of size W
        const double slack = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, wt(v));
        nonneg = nonneg && gap >= -slack;
        min_gap = std::min(min_gap, gap);
        max_scaled = std::max(max_scaled, v * gap);
      }
    }
  }
  r.measured = worst;
  r.predicted = 0.0;
  r.passed = worst <= r.tolerance && nonneg;
  r.detail = "max rel err at x=50 " + num(worst, 3) + "; min of difference - limit " +
             num(min_gap, 3) + "; max x*(difference - limit) " + num(max_scaled, 4);
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_determinism(const LevyModel& model, const Options& opt) {
  Stopwatch sw;
  auto r = start(13);
  SimConfig cfg;
  cfg.beta = subcritical_beta(model);
  cfg.start = 1.0;
  cfg.replicates = reps(opt, 13);
  cfg.master_seed = seed_for(opt, 13);
  std::vector<std::string> csv;
  for (const unsigned w : {1u, 4u, 8u}) {
    cfg.workers = w;
    std::ostringstream os;
    write_dataset_csv(os, simulate_batch(model, cfg));
    csv.push_back(os.str());
  }
  const bool same = csv[0] == csv[1] && csv[0] == csv[2];
  r.measured = same ? 0.0 : 1.0;
  r.passed = same;
  r.detail = std::to_string(cfg.replicates) + " replicates, " + std::to_string(csv[0].size()) +
             " bytes; outputs " + (same ? "identical" : "differ");
  r.seconds = sw.seconds();
  return r;
}

std::vector<CheckResult> run_verification(const LevyModel& model, const Options& opt) {
  if (!has_minimum(model))
    throw RegimeError("verify: psi'(0+) >= 0, the branching process never dies out");
  const LevyModel one[] = {model};
  std::vector<CheckResult> out;
  out.push_back(check_roots(one));
  out.push_back(check_scale_oracle(one));
  out.push_back(check_tilt(one));
  out.push_back(check_mean_progeny(model, opt));
  out.push_back(check_moments(model, opt));
  out.push_back(check_resolvent(model, opt));
  if (opt.level == Level::Full) {
    const auto& c = criterion(7);
    const auto sub = run_tail_study(model, subcritical_beta(model), false, c.replicates_full,
                                    seed_for(opt, 7), opt.workers);
    const auto crit = run_tail_study(model, critical_beta(model), true, c.replicates_full,
                                     seed_for(opt, 8), opt.workers);
    out.push_back(check_tail_exponent(model, sub));
    out.push_back(check_critical_scaling(crit, opt));
    out.push_back(check_max_decay(model, sub, crit));
    out.push_back(check_proportionality(model, opt));
  } else {
    for (int id = 7; id <= 10; ++id) {
      auto r = start(id);
      r.skipped = true;
      r.detail = "full level only";
      out.push_back(r);
    }
  }
  out.push_back(check_chi(one, opt));
  out.push_back(check_scale_difference(one));
  out.push_back(check_determinism(model, opt));
  return out;
}

std::string format_line(const CheckResult& r) {
  char head[160];
  std::snprintf(head, sizeof head, "[%s] %2d %-18s measured=%-12s predicted=%-12s tol=%-8s %6.1fs",
                r.skipped ? "SKIP" : (r.passed ? "PASS" : "FAIL"), r.id, r.name.c_str(),
                num(r.measured).c_str(), num(r.predicted).c_str(), num(r.tolerance, 3).c_str(),
                r.seconds);
  return std::string(head) + (r.detail.empty() ? "" : "  " + r.detail);
}

}  // namespace snlevy::verify
