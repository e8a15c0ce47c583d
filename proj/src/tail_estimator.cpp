#include "snlevy/tail_estimator.hpp"

#include "snlevy/errors.hpp"
#include "snlevy/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace snlevy {

namespace {

constexpr double kZ95 = 1.959963984540054;

void check_grid(std::span<const std::int64_t> grid) {
  if (grid.empty()) throw ArgumentError("survival grid is empty");
  if (grid.front() < 1) throw ArgumentError("survival grid must start at n >= 1");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] <= grid[i - 1]) throw ArgumentError("survival grid must be strictly increasing");
}

SurvivalCurve curve_from_sorted(const std::vector<std::int64_t>& sorted,
                                std::span<const std::int64_t> grid) {
  SurvivalCurve c;
  c.grid.assign(grid.begin(), grid.end());
  c.sample_size = static_cast<std::int64_t>(sorted.size());
  const double n = static_cast<double>(sorted.size());
  const double z2 = kZ95 * kZ95;
  for (const auto g : grid) {
    const auto k = static_cast<std::int64_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), g));
    const double p = static_cast<double>(k) / n;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = kZ95 / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    c.count.push_back(k);
    c.surv.push_back(p);
    c.ci_lo.push_back(std::clamp(centre - half, 0.0, p));
    c.ci_hi.push_back(std::clamp(centre + half, p, 1.0));
  }
  return c;
}

// Observation y_i = log of an exceedance probability p_i at abscissa x_i;
// thresholds are increasing, so p_i is non-increasing.
struct Obs {
  double x;
  double y;
  double p;
};

struct LineFit {
  double slope;
  double intercept;
  double slope_se;
};

enum class Weighting { Binomial, Equal };

// Least squares with weights N p / (1 - p) (or 1) and a sandwich variance
// using Cov(log p_i, log p_j) = (1 / p_i - 1) / N for i <= j.
LineFit fit_line(const std::vector<Obs>& obs, double n, Weighting weighting = Weighting::Binomial) {
  const std::size_t m = obs.size();
  std::vector<double> w(m);
  double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
  for (std::size_t i = 0; i < m; ++i) {
    w[i] = weighting == Weighting::Binomial ? n * obs[i].p / (1.0 - obs[i].p) : 1.0;
    s0 += w[i];
    s1 += w[i] * obs[i].x;
    s2 += w[i] * obs[i].x * obs[i].x;
    t0 += w[i] * obs[i].y;
    t1 += w[i] * obs[i].x * obs[i].y;
  }
  const double det = s0 * s2 - s1 * s1;
  const double slope = (s0 * t1 - s1 * t0) / det;
  const double intercept = (s2 * t0 - s1 * t1) / det;

  // meat = sum_ij w_i w_j cov_ij (1, x_i)(1, x_j)^T
  double b00 = 0, b01 = 0, b11 = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double cov = (1.0 / obs[std::min(i, j)].p - 1.0) / n;
      const double f = w[i] * w[j] * cov;
      b00 += f;
      b01 += f * obs[j].x;
      b11 += f * obs[i].x * obs[j].x;
    }
  }
  // second row of A^-1 = (-s1, s0) / det
  const double a0 = -s1 / det, a1 = s0 / det;
  const double var = a0 * a0 * b00 + 2.0 * a0 * a1 * b01 + a1 * a1 * b11;
  return {slope, intercept, std::sqrt(std::max(var, 0.0))};
}

[[noreturn]] void not_enough(const char* what, FitRange range, const std::vector<double>& usable) {
  std::ostringstream os;
  os << what << ": need " << kMinFitPoints << " usable thresholds in [" << range.lo << ", "
     << range.hi << "] with >= " << kMinFitCount << " samples and surv < 1, found "
     << usable.size();
  if (!usable.empty()) {
    os << " (";
    for (std::size_t i = 0; i < usable.size(); ++i) os << (i ? ", " : "") << usable[i];
    os << ")";
  }
  throw FitError(os.str());
}

std::vector<Obs> usable_points(const SurvivalCurve& curve, FitRange range, const char* what) {
  std::vector<Obs> obs;
  std::vector<double> where;
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    const auto g = curve.grid[i];
    if (g < range.lo || g > range.hi || g > curve.max_reliable) continue;
    if (curve.count[i] < kMinFitCount || !(curve.surv[i] < 1.0)) continue;
    obs.push_back({std::log(static_cast<double>(g)), std::log(curve.surv[i]), curve.surv[i]});
    where.push_back(static_cast<double>(g));
  }
  if (static_cast<int>(obs.size()) < kMinFitPoints) not_enough(what, range, where);
  return obs;
}

// max / min of exp(y_i - shape_i)
double flatness(const std::vector<double>& log_ratio) {
  const auto [lo, hi] = std::minmax_element(log_ratio.begin(), log_ratio.end());
  return std::exp(*hi - *lo);
}

TailFitReport loglog_fit(const SurvivalCurve& curve, FitRange range, const char* what) {
  const auto obs = usable_points(curve, range, what);
  const auto fit = fit_line(obs, static_cast<double>(curve.sample_size));
  TailFitReport r;
  r.exponent = -fit.slope;
  r.ci_lo = r.exponent - kZ95 * fit.slope_se;
  r.ci_hi = r.exponent + kZ95 * fit.slope_se;
  r.prefactor = std::exp(fit.intercept);
  std::vector<double> resid;
  for (const auto& o : obs) resid.push_back(o.y - fit.slope * o.x);
  r.flatness_ratio = flatness(resid);
  r.fit_lo = std::exp(obs.front().x);
  r.fit_hi = std::exp(obs.back().x);
  r.points_used = static_cast<int>(obs.size());
  return r;
}

}  // namespace

SurvivalCurve survival_curve(const Dataset& dataset, std::span<const std::int64_t> grid) {
  if (dataset.outcomes.empty()) throw ArgumentError("survival_curve: empty dataset");
  check_grid(grid);
  const std::int64_t floor = dataset.config.cap_particles / 2;
  std::vector<std::int64_t> z;
  z.reserve(dataset.outcomes.size());
  for (const auto& o : dataset.outcomes) z.push_back(o.censored ? std::max(o.z0, floor) : o.z0);
  std::sort(z.begin(), z.end());
  auto c = curve_from_sorted(z, grid);
  c.max_reliable = floor;
  return c;
}

SurvivalCurve survival_curve(std::span<const std::int64_t> samples,
                             std::span<const std::int64_t> grid) {
  if (samples.empty()) throw ArgumentError("survival_curve: no samples");
  check_grid(grid);
  std::vector<std::int64_t> z(samples.begin(), samples.end());
  std::sort(z.begin(), z.end());
  return curve_from_sorted(z, grid);
}

std::vector<std::int64_t> log_grid(std::int64_t lo, std::int64_t hi, int points) {
  if (lo < 1 || hi < lo || points < 1) throw ArgumentError("log_grid: need 1 <= lo <= hi, points >= 1");
  std::vector<std::int64_t> g;
  const double ratio = static_cast<double>(hi) / static_cast<double>(lo);
  for (int k = 0; k < points; ++k) {
    const double t = points == 1 ? 0.0 : static_cast<double>(k) / (points - 1);
    const auto v = static_cast<std::int64_t>(std::llround(static_cast<double>(lo) * std::pow(ratio, t)));
    if (g.empty() || v > g.back()) g.push_back(v);
  }
  return g;
}

TailFitReport tail_slope(const SurvivalCurve& curve, FitRange range) {
  return loglog_fit(curve, range, "tail_slope");
}

TailFitReport critical_scaling(const SurvivalCurve& curve, FitRange range) {
  auto r = loglog_fit(curve, range, "critical_scaling");
  const auto obs = usable_points(curve, range, "critical_scaling");
  std::vector<double> log_g;
  double mean = 0.0;
  for (const auto& o : obs) {
    log_g.push_back(o.y + o.x + 2.0 * std::log(o.x));
    mean += log_g.back();
  }
  r.prefactor = std::exp(mean / static_cast<double>(log_g.size()));
  r.flatness_ratio = flatness(log_g);
  return r;
}

TailFitReport tail_prefactor(const SurvivalCurve& curve, FitRange range, double exponent) {
  const auto obs = usable_points(curve, range, "tail_prefactor");
  const double n = static_cast<double>(curve.sample_size);
  double sw = 0.0, swy = 0.0;
  std::vector<double> log_c;
  for (const auto& o : obs) {
    const double w = n * o.p / (1.0 - o.p);
    log_c.push_back(o.y + exponent * o.x);
    sw += w;
    swy += w * log_c.back();
  }
  TailFitReport r;
  r.exponent = r.ci_lo = r.ci_hi = exponent;
  r.prefactor = std::exp(swy / sw);
  r.flatness_ratio = flatness(log_c);
  r.fit_lo = std::exp(obs.front().x);
  r.fit_hi = std::exp(obs.back().x);
  r.points_used = static_cast<int>(obs.size());
  return r;
}

TailFitReport max_decay(const Dataset& dataset, std::span<const double> x_grid, MaxMode mode) {
  if (dataset.outcomes.empty()) throw ArgumentError("max_decay: empty dataset");
  if (x_grid.empty() || !std::is_sorted(x_grid.begin(), x_grid.end()))
    throw ArgumentError("max_decay: x grid must be non-empty and increasing");
  std::vector<double> m;
  m.reserve(dataset.outcomes.size());
  for (const auto& o : dataset.outcomes) m.push_back(o.max_pos);
  std::sort(m.begin(), m.end());
  const double n = static_cast<double>(m.size());

  std::vector<Obs> obs;
  std::vector<double> where;
  for (const double x : x_grid) {
    const auto k = m.end() - std::lower_bound(m.begin(), m.end(), x);
    const double p = static_cast<double>(k) / n;
    if (k < kMinFitCount || !(p < 1.0)) continue;
    double y = std::log(p);
    if (mode == MaxMode::Critical) y += std::log(x);
    obs.push_back({x, y, p});
    where.push_back(x);
  }
  const FitRange range{x_grid.front(), x_grid.back()};
  if (static_cast<int>(obs.size()) < kMinFitPoints) not_enough("max_decay", range, where);

  const auto fit = fit_line(obs, n, Weighting::Equal);
  TailFitReport r;
  r.exponent = -fit.slope;
  r.ci_lo = r.exponent - kZ95 * fit.slope_se;
  r.ci_hi = r.exponent + kZ95 * fit.slope_se;
  r.prefactor = std::exp(fit.intercept);
  std::vector<double> resid;
  for (const auto& o : obs) resid.push_back(o.y - fit.slope * o.x);
  r.flatness_ratio = flatness(resid);
  r.fit_lo = obs.front().x;
  r.fit_hi = obs.back().x;
  r.points_used = static_cast<int>(obs.size());
  return r;
}

HillEstimate hill_estimator(std::span<const std::int64_t> samples, std::int64_t k) {
  if (k < 1 || k >= static_cast<std::int64_t>(samples.size()))
    throw ArgumentError("hill_estimator: need 1 <= k < sample size");
  std::vector<std::int64_t> top(samples.begin(), samples.end());
  std::nth_element(top.begin(), top.begin() + k, top.end(), std::greater<>());
  const double ref = static_cast<double>(top[static_cast<std::size_t>(k)]);
  if (!(ref > 0.0)) throw ArgumentError("hill_estimator: reference order statistic must be > 0");
  double h = 0.0;
  for (std::int64_t i = 0; i < k; ++i) h += std::log(static_cast<double>(top[static_cast<std::size_t>(i)]) / ref);
  h /= static_cast<double>(k);
  if (!(h > 0.0)) throw FitError("hill_estimator: top order statistics are all equal");
  const double alpha = 1.0 / h;
  return {alpha, alpha / std::sqrt(static_cast<double>(k)), k};
}

std::vector<std::int64_t> synthetic_pareto(double alpha, std::int64_t count, std::uint64_t seed) {
  if (!(alpha > 0.0)) throw ArgumentError("synthetic_pareto: alpha must be > 0");
  if (count < 0) throw ArgumentError("synthetic_pareto: count must be >= 0");
  CounterRng rng(seed, 0);
  std::vector<std::int64_t> z(static_cast<std::size_t>(count));
  for (auto& v : z) v = static_cast<std::int64_t>(std::floor(std::pow(rng.uniform(), -1.0 / alpha)));
  return z;
}

std::vector<std::int64_t> synthetic_critical(std::int64_t count, std::uint64_t seed) {
  if (count < 0) throw ArgumentError("synthetic_critical: count must be >= 0");
  CounterRng rng(seed, 0);
  const double l3 = std::log(3.0);
  const double threshold = l3 + 2.0 * std::log(l3);
  std::vector<std::int64_t> z(static_cast<std::size_t>(count));
  for (auto& v : z) {
    // Z = floor(t) with t ln^2 t = 1/U, i.e. s + 2 ln s = -ln U for s = ln t
    const double target = -std::log(rng.uniform());
    if (target < threshold) {
      v = 2;
      continue;
    }
    double s = target;
    for (int i = 0; i < 60; ++i) {
      const double step = (s + 2.0 * std::log(s) - target) / (1.0 + 2.0 / s);
      s -= step;
      if (std::abs(step) < 1e-15 * s) break;
    }
    v = static_cast<std::int64_t>(std::floor(std::exp(s)));
  }
  return z;
}

}  // namespace snlevy
