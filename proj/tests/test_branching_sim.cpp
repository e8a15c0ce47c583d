#include "oracles.hpp"

#include "snlevy/branching_sim.hpp"
#include "snlevy/errors.hpp"
#include "snlevy/fluctuation.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace snlevy;

namespace {

SimConfig config(double beta, std::int64_t reps, std::uint64_t seed) {
  SimConfig c;
  c.beta = beta;
  c.replicates = reps;
  c.master_seed = seed;
  return c;
}

double fraction(const Dataset& d, auto pred) {
  const auto k = std::count_if(d.outcomes.begin(), d.outcomes.end(), pred);
  return static_cast<double>(k) / static_cast<double>(d.outcomes.size());
}

// |p_hat - p| within 4.5 binomial standard errors
bool binomial_close(double p_hat, double p, std::int64_t n) {
  return std::abs(p_hat - p) <= 4.5 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace

TEST_CASE("configuration is validated", "[branching_sim]") {
  auto c = config(0.3, 10, 1);
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.beta = 0.0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = c;
  bad.start = -1.0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = c;
  bad.barrier = 0.5;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = c;
  bad.dt = 0.0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = c;
  bad.cap_particles = 0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  CHECK_THROWS_AS(simulate_batch(oracle::b1(), config(0.6, 10, 1)), RegimeError);
  CHECK_THROWS_AS(simulate_batch(LevyModel(1.0, 1.0), config(0.1, 10, 1)), RegimeError);
}

TEST_CASE("mean progeny matches the closed form", "[branching_sim]") {
  const double beta = 0.3;
  const auto d = simulate_batch(oracle::b1(), config(beta, 20000, 11));
  const auto s = summarize(d);
  const double expected = std::exp((1.0 - std::sqrt(1.0 - 2.0 * beta)) * 1.0);
  CHECK(s.censored == 0);
  CHECK(std::abs(s.mean_z0 - expected) < 4.5 * s.se_z0);
}

TEST_CASE("probability of at least one branching event", "[branching_sim]") {
  // P(Z = 1) = E[exp(-beta tau)] = exp(-(sqrt(1 + 2 beta) - 1) a)
  const double beta = 0.45, a = 1.0;
  const auto d = simulate_batch(oracle::b1(), config(beta, 20000, 12));
  const double p = 1.0 - std::exp(-(std::sqrt(1.0 + 2.0 * beta) - 1.0) * a);
  CHECK(binomial_close(fraction(d, [](const auto& o) { return o.z0 >= 2; }), p, 20000));
}

TEST_CASE("progeny distribution matches the generating-function hierarchy", "[branching_sim]") {
  const double beta = 0.45;
  const auto d = simulate_batch(oracle::b1(), config(beta, 20000, 13));
  const auto exact = oracle::bbm_progeny_tail(-1.0, 1.0, beta, 1.0, 10);
  for (int n : {2, 3, 5, 10}) {
    const double p_hat = fraction(d, [n](const auto& o) { return o.z0 >= n; });
    INFO("n = " << n << " simulated " << p_hat << " exact " << exact[n]);
    CHECK(binomial_close(p_hat, exact[n], 20000));
  }
}

TEST_CASE("maximum position matches the travelling-wave boundary problem", "[branching_sim]") {
  const double beta = 0.45;
  const auto d = simulate_batch(oracle::b1(), config(beta, 20000, 14));
  for (double x : {2.0, 3.0, 5.0}) {
    const double p = oracle::bbm_max_tail(-1.0, 1.0, beta, 1.0, x);
    const double p_hat = fraction(d, [x](const auto& o) { return o.max_pos >= x; });
    INFO("x = " << x << " simulated " << p_hat << " exact " << p);
    CHECK(binomial_close(p_hat, p, 20000));
  }
}

TEST_CASE("barrier mean and second moment", "[branching_sim]") {
  const auto m = oracle::j1();
  const double beta = 0.9 * oracle::kJ1QStar;
  auto c = config(beta, 20000, 15);
  c.barrier = 3.0;
  const auto s = summarize(simulate_batch(m, c));
  CHECK(std::abs(s.mean_z0 - mean_progeny(m, beta, 1.0, 3.0)) < 4.5 * s.se_z0);
  CHECK(std::abs(s.mean_z0_sq - second_moment_barrier(m, beta, 1.0, 3.0)) < 4.5 * s.se_z0_sq);
}

TEST_CASE("coarser steps keep the barrier mean", "[branching_sim]") {
  const auto m = oracle::b1();
  auto c = config(0.45, 20000, 16);
  c.barrier = 3.0;
  c.dt = 0.1;
  const auto s = summarize(simulate_batch(m, c));
  CHECK(std::abs(s.mean_z0 - mean_progeny(m, 0.45, 1.0, 3.0)) < 4.5 * s.se_z0);
}

TEST_CASE("barrier runs are coupled path by path", "[branching_sim]") {
  const auto m = oracle::j1();
  auto c = config(0.9 * oracle::kJ1QStar, 2000, 17);
  const auto free = simulate_batch(m, c);
  c.barrier = 4.0;
  const auto wide = simulate_batch(m, c);
  c.barrier = 2.0;
  const auto narrow = simulate_batch(m, c);
  for (std::size_t i = 0; i < free.outcomes.size(); ++i) {
    REQUIRE(narrow.outcomes[i].z0 <= wide.outcomes[i].z0);
    REQUIRE(wide.outcomes[i].z0 <= free.outcomes[i].z0);
    if (free.outcomes[i].max_pos < 2.0) REQUIRE(narrow.outcomes[i].z0 == free.outcomes[i].z0);
  }
}

TEST_CASE("particle accounting", "[branching_sim]") {
  auto c = config(0.45, 2000, 18);
  c.barrier = 3.0;
  for (const auto& o : simulate_batch(oracle::b1(), c).outcomes) {
    REQUIRE(!o.censored);
    REQUIRE(o.total_particles == 2 * (o.z0 + o.exited_up) - 1);
    REQUIRE(o.max_pos < 3.0);
  }
  c.barrier.reset();
  for (const auto& o : simulate_batch(oracle::b1(), c).outcomes) {
    REQUIRE(o.total_particles == 2 * o.z0 - 1);
    REQUIRE(o.max_pos >= 1.0);
  }
}

TEST_CASE("censoring at the particle cap", "[branching_sim]") {
  auto c = config(0.5, 2000, 19);
  c.cap_particles = 41;
  const auto d = simulate_batch(oracle::b1(), c);
  const auto s = summarize(d);
  CHECK(s.censored > 0);
  CHECK(s.censored_fraction == Catch::Approx(static_cast<double>(s.censored) / 2000));
  for (const auto& o : d.outcomes) {
    if (o.censored)
      REQUIRE(o.total_particles > 41);
    else
      REQUIRE(o.total_particles <= 41);
  }
}

TEST_CASE("outcomes do not depend on the worker count", "[branching_sim]") {
  auto c = config(oracle::kJ1QStar, 3000, 20);
  c.workers = 1;
  const auto one = simulate_batch(oracle::j1(), c);
  c.workers = 3;
  const auto three = simulate_batch(oracle::j1(), c);
  CHECK(one.outcomes == three.outcomes);
  CHECK(simulate_replicate(oracle::j1(), c, 1234) == one.outcomes[1234]);
}

TEST_CASE("first passage undershoots", "[branching_sim]") {
  const auto b = simulate_first_passage(oracle::b1(), 1.0, 0.0, 500, 21, 1);
  CHECK(std::all_of(b.begin(), b.end(), [](double l) { return l == 0.0; }));

  const auto m = oracle::j1();
  const auto law = undershoot_law(m, 2.0);
  const std::int64_t n = 20000;
  const auto u = simulate_first_passage(m, 2.0, 0.0, n, 22, 0);
  const double creep = static_cast<double>(std::count(u.begin(), u.end(), 0.0)) / n;
  CHECK(binomial_close(creep, law.creep_atom, n));
  CHECK(std::all_of(u.begin(), u.end(), [](double l) { return l <= 0.0; }));
  double t = 0.0, t2 = 0.0;
  for (double l : u) {
    const double e = std::exp(-0.5 * l);
    t += e;
    t2 += e * e;
  }
  t /= n;
  const double se = std::sqrt((t2 / n - t * t) / n);
  CHECK(std::abs(t - law.transform(0.5)) < 4.5 * se);
  CHECK_THROWS_AS(simulate_first_passage(m, 2.0, 5.0, 10, 1, 1), RegimeError);
}

TEST_CASE("occupation density matches the killed resolvent", "[branching_sim]") {
  const auto m = oracle::b1();
  SimConfig c;
  c.beta = 0.0;
  c.barrier = 3.0;
  c.replicates = 20000;
  c.master_seed = 23;
  c.dt = 0.005;
  std::vector<double> edges;
  for (int i = 0; i <= 6; ++i) edges.push_back(0.5 * i);
  const auto occ = simulate_occupation(m, c, edges);
  REQUIRE(occ.density.size() == 6);
  for (std::size_t k = 0; k < 6; ++k) {
    // bin average of the density by Simpson's rule
    const double lo = edges[k], hi = edges[k + 1];
    const int n = 200;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double y = lo + (hi - lo) * i / n;
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      s += w * resolvent_density(m, 0.0, 1.0, 3.0, y);
    }
    s /= 3.0 * n;
    INFO("bin " << k << " simulated " << occ.density[k] << " +- " << occ.std_error[k] << " exact " << s);
    CHECK(std::abs(occ.density[k] - s) < 4.5 * occ.std_error[k]);
  }
}
