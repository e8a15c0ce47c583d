#include "snlevy/branching_sim.hpp"

#include "snlevy/errors.hpp"
#include "snlevy/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <new>
#include <thread>

namespace snlevy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Crossing probabilities below exp(-40) are not sampled.
constexpr double kNegligibleExponent = 40.0;
// Without an upper barrier the bridge correction is exact for any step.
constexpr double kFirstPassageStep = 1.0;
constexpr std::int64_t kChunk = 256;

struct Params {
  double drift;
  double sigma;
  double var;
  double dt;
  double sd_dt;
  double k_dt;  // 2 / (sigma^2 dt)
  double beta;
  double barrier;
  std::int64_t cap;
  std::uint64_t seed;
  double jump_total;
  std::vector<double> jump_cum;
  std::vector<double> jump_rate;
};

Params make_params(const LevyModel& model, double beta, std::optional<double> barrier, double dt,
                   std::int64_t cap, std::uint64_t seed) {
  Params p;
  p.drift = model.drift();
  p.var = model.gaussian_sq();
  p.sigma = std::sqrt(p.var);
  p.dt = dt;
  p.sd_dt = p.sigma * std::sqrt(dt);
  p.k_dt = 2.0 / (p.var * dt);
  p.beta = beta;
  p.barrier = barrier.value_or(kInf);
  p.cap = cap;
  p.seed = seed;
  p.jump_total = 0.0;
  for (const auto& j : model.jumps()) {
    p.jump_total += j.intensity;
    p.jump_cum.push_back(p.jump_total);
    p.jump_rate.push_back(j.rate);
  }
  return p;
}

double jump_size(const Params& p, CounterRng& rng) {
  std::size_t k = 0;
  if (p.jump_rate.size() > 1) {
    const double u = rng.uniform() * p.jump_total;
    while (k + 1 < p.jump_cum.size() && u >= p.jump_cum[k]) ++k;
  }
  return rng.exponential(p.jump_rate[k]);
}

std::uint64_t child_id(std::uint64_t parent, int k) {
  return mix64(parent ^ (0xD1B54A32D192ED03ull * static_cast<std::uint64_t>(k + 1)));
}

struct NullObserver {
  void step(double, double, double, bool) {}
  void absorbed(double) {}
};

enum class Fate { Alive, Absorbed, Exited };

// Advances the diffusion part for `duration` in sub-steps of at most dt.
template <class Obs>
Fate diffuse(const Params& p, CounterRng& rng, double& u, double& path_max, double duration,
             Obs& obs) {
  double remaining = duration;
  while (remaining > 0.0) {
    double h = p.dt, sd = p.sd_dt, k = p.k_dt;
    if (remaining > p.dt) {
      remaining -= p.dt;
    } else {
      h = remaining;
      sd = p.sigma * std::sqrt(h);
      k = 2.0 / (p.var * h);
      remaining = 0.0;
    }
    const double v = u + p.drift * h + sd * rng.normal();

    const double e_low = k * u * v;
    if (v <= 0.0 || (e_low < kNegligibleExponent && rng.uniform() < std::exp(-e_low))) {
      obs.step(u, v, h, false);
      obs.absorbed(0.0);
      return Fate::Absorbed;
    }
    if (v >= p.barrier) {
      obs.step(u, v, h, false);
      return Fate::Exited;
    }
    // Bridge maximum by inversion, sampled only when it can beat the record.
    const double level = std::max(path_max, v);
    const double e_up = k * (level - u) * (level - v);
    if (e_up < kNegligibleExponent) {
      const double w = rng.uniform();
      if (w < std::exp(-e_up)) {
        const double d = u - v;
        const double m = 0.5 * (u + v + std::sqrt(d * d - 2.0 * p.var * h * std::log(w)));
        if (m >= p.barrier) {
          obs.step(u, v, h, false);
          return Fate::Exited;
        }
        path_max = m;
      }
    }
    obs.step(u, v, h, true);
    u = v;
  }
  return Fate::Alive;
}

template <class Obs>
ReplicateOutcome run_tree(const Params& p, double start, std::uint32_t rep, Obs& obs) {
  struct Pending {
    double pos;
    double path_max;
    std::uint64_t id;
  };
  ReplicateOutcome out;
  out.max_pos = start;
  std::vector<Pending> work{{start, start, 0}};

  while (!work.empty()) {
    Pending cur = work.back();
    work.pop_back();
    CounterRng rng(p.seed, rep, cur.id);
    double u = cur.pos;
    double pm = cur.path_max;
    double t_branch = p.beta > 0.0 ? rng.exponential(p.beta) : kInf;
    for (;;) {
      const double t_jump = p.jump_total > 0.0 ? rng.exponential(p.jump_total) : kInf;
      const bool jump_first = t_jump < t_branch;
      const Fate fate = diffuse(p, rng, u, pm, jump_first ? t_jump : t_branch, obs);
      if (fate == Fate::Absorbed) {
        ++out.z0;
        break;
      }
      if (fate == Fate::Exited) {
        ++out.exited_up;
        break;
      }
      if (jump_first) {
        t_branch -= t_jump;
        const double y = u - jump_size(p, rng);
        if (y <= 0.0) {
          obs.absorbed(y);
          ++out.z0;
          break;
        }
        u = y;
        continue;
      }
      out.total_particles += 2;
      if (out.total_particles > p.cap) {
        out.censored = true;
        out.max_pos = std::max(out.max_pos, pm);
        return out;
      }
      work.push_back({u, pm, child_id(cur.id, 1)});
      cur.id = child_id(cur.id, 0);
      rng = CounterRng(p.seed, rep, cur.id);
      t_branch = rng.exponential(p.beta);
    }
    out.max_pos = std::max(out.max_pos, pm);
  }
  return out;
}

unsigned resolve_workers(unsigned requested) {
  return requested > 0 ? requested : default_workers();
}

// Runs fn(chunk_index, begin, end) over [0, n) on a pool of threads.
template <class Fn>
void parallel_chunks(std::int64_t n, unsigned workers, Fn&& fn) {
  const std::int64_t chunks = (n + kChunk - 1) / kChunk;
  if (chunks == 0) return;
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::int64_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        fn(c, c * kChunk, std::min(n, (c + 1) * kChunk));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(chunks);
        return;
      }
    }
  };
  const auto n_threads = static_cast<unsigned>(std::min<std::int64_t>(workers, chunks));
  if (n_threads <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

void check_start(double start, std::optional<double> barrier) {
  if (!(start > 0.0) || !std::isfinite(start)) throw ArgumentError("start must be finite and > 0");
  if (barrier && (!(*barrier > start) || !std::isfinite(*barrier)))
    throw ArgumentError("barrier must be finite and > start");
}

void check_replicates(std::int64_t replicates) {
  if (replicates < 0 || replicates > std::int64_t{1} << 32)
    throw ArgumentError("replicates must be in [0, 2^32]");
}

}  // namespace

void SimConfig::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ArgumentError("beta must be finite and > 0");
  check_start(start, barrier);
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ArgumentError("dt must be finite and > 0");
  if (cap_particles < 1) throw ArgumentError("cap_particles must be >= 1");
  check_replicates(replicates);
}

unsigned default_workers() {
  if (const char* env = std::getenv("SNLEVY_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

DatasetSummary summarize(const Dataset& dataset) {
  DatasetSummary s{};
  const auto& out = dataset.outcomes;
  s.replicates = static_cast<std::int64_t>(out.size());
  if (out.empty()) return s;
  long double s1 = 0, s2 = 0, s4 = 0;
  for (const auto& o : out) {
    const long double z = static_cast<long double>(o.z0);
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
    s.censored += o.censored ? 1 : 0;
  }
  const long double n = static_cast<long double>(out.size());
  const long double mean = s1 / n;
  const long double mean_sq = s2 / n;
  s.mean_z0 = static_cast<double>(mean);
  s.mean_z0_sq = static_cast<double>(mean_sq);
  if (out.size() > 1) {
    s.var_z0 = static_cast<double>((s2 - n * mean * mean) / (n - 1));
    const long double var_sq = (s4 - n * mean_sq * mean_sq) / (n - 1);
    s.se_z0 = std::sqrt(s.var_z0 / static_cast<double>(n));
    s.se_z0_sq = std::sqrt(static_cast<double>(var_sq / n));
  }
  s.censored_fraction = static_cast<double>(s.censored) / static_cast<double>(n);
  return s;
}

ReplicateOutcome simulate_replicate(const LevyModel& model, const SimConfig& config,
                                    std::uint32_t stream_index) {
  config.validate();
  const Params p = make_params(model, config.beta, config.barrier, config.dt,
                               config.cap_particles, config.master_seed);
  NullObserver obs;
  return run_tree(p, config.start, stream_index, obs);
}

Dataset simulate_batch(const LevyModel& model, const SimConfig& config) {
  config.validate();
  require_extinction(model, config.beta);
  const Params p = make_params(model, config.beta, config.barrier, config.dt,
                               config.cap_particles, config.master_seed);
  const unsigned workers = resolve_workers(config.workers);
  const auto t0 = std::chrono::steady_clock::now();

  Dataset ds{model, config, {}, {}};
  std::atomic<std::int64_t> completed{0};
  try {
    ds.outcomes.resize(static_cast<std::size_t>(config.replicates));
    parallel_chunks(config.replicates, workers, [&](std::int64_t, std::int64_t b, std::int64_t e) {
      NullObserver obs;
      for (std::int64_t i = b; i < e; ++i) {
        ds.outcomes[static_cast<std::size_t>(i)] =
            run_tree(p, config.start, static_cast<std::uint32_t>(i), obs);
        completed.fetch_add(1, std::memory_order_relaxed);
      }
    });
  } catch (const std::bad_alloc&) {
    throw PartialDatasetError("simulate_batch: out of memory", completed.load());
  }
  ds.stats.workers = workers;
  ds.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return ds;
}

std::vector<double> simulate_first_passage(const LevyModel& model, double a, double tilt_c,
                                           std::int64_t replicates, std::uint64_t seed,
                                           unsigned workers) {
  check_start(a, std::nullopt);
  check_replicates(replicates);
  if (!(tilt_c >= 0.0) || !std::isfinite(tilt_c))
    throw ArgumentError("tilt must be finite and >= 0");
  const LevyModel tilted = esscher_tilt(model, tilt_c);
  if (detail::psi_ext(tilted, 0.0, 1) > 1e-12)
    throw RegimeError("tilted process drifts upward: first passage below 0 is not certain");

  const Params p = make_params(tilted, 0.0, std::nullopt, kFirstPassageStep, 1, seed);
  std::vector<double> samples(static_cast<std::size_t>(replicates));
  struct Recorder {
    double value = 0.0;
    void step(double, double, double, bool) {}
    void absorbed(double y) { value = y; }
  };
  parallel_chunks(replicates, resolve_workers(workers),
                  [&](std::int64_t, std::int64_t b, std::int64_t e) {
                    for (std::int64_t i = b; i < e; ++i) {
                      Recorder rec;
                      run_tree(p, a, static_cast<std::uint32_t>(i), rec);
                      samples[static_cast<std::size_t>(i)] = rec.value;
                    }
                  });
  return samples;
}

OccupationEstimate simulate_occupation(const LevyModel& model, const SimConfig& config,
                                       std::span<const double> edges) {
  if (!(config.beta >= 0.0) || !std::isfinite(config.beta))
    throw ArgumentError("beta must be finite and >= 0");
  check_start(config.start, config.barrier);
  check_replicates(config.replicates);
  if (!(config.dt > 0.0)) throw ArgumentError("dt must be > 0");
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()) ||
      std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw ArgumentError("edges must be strictly increasing with at least 2 entries");
  if (config.beta > 0.0) {
    require_extinction(model, config.beta);
  } else if (!config.barrier && detail::psi_ext(model, 0.0, 1) > 0.0) {
    throw RegimeError("process drifts upward and no barrier stops it");
  }

  const Params p = make_params(model, config.beta, config.barrier, config.dt,
                               config.cap_particles, config.master_seed);
  const std::size_t bins = edges.size() - 1;
  struct Accumulator {
    std::span<const double> edges;
    std::vector<double> occ;
    void add(double y, double t) {
      if (y < edges.front() || !(y < edges.back())) return;
      const auto it = std::upper_bound(edges.begin(), edges.end(), y);
      const auto k = static_cast<std::size_t>(it - edges.begin() - 1);
      // a diffusion leaves an edge to either side with probability 1/2
      if (y == edges[k] && k > 0) {
        occ[k - 1] += 0.5 * t;
        occ[k] += 0.5 * t;
        return;
      }
      occ[k] += t;
    }
    void step(double u, double v, double h, bool alive) {
      add(u, 0.5 * h);
      if (alive) add(v, 0.5 * h);
    }
    void absorbed(double) {}
  };

  const std::int64_t chunks = (config.replicates + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> sum(chunks, std::vector<double>(bins)),
      sum_sq(chunks, std::vector<double>(bins));
  parallel_chunks(config.replicates, resolve_workers(config.workers),
                  [&](std::int64_t c, std::int64_t b, std::int64_t e) {
                    Accumulator acc{edges, std::vector<double>(bins)};
                    for (std::int64_t i = b; i < e; ++i) {
                      std::fill(acc.occ.begin(), acc.occ.end(), 0.0);
                      run_tree(p, config.start, static_cast<std::uint32_t>(i), acc);
                      for (std::size_t k = 0; k < bins; ++k) {
                        sum[c][k] += acc.occ[k];
                        sum_sq[c][k] += acc.occ[k] * acc.occ[k];
                      }
                    }
                  });

  OccupationEstimate est{{edges.begin(), edges.end()}, std::vector<double>(bins),
                         std::vector<double>(bins)};
  const double n = static_cast<double>(config.replicates);
  if (n < 2) return est;
  for (std::size_t k = 0; k < bins; ++k) {
    double s = 0.0, s2 = 0.0;
    for (std::int64_t c = 0; c < chunks; ++c) {
      s += sum[c][k];
      s2 += sum_sq[c][k];
    }
    const double width = edges[k + 1] - edges[k];
    const double mean = s / n;
    const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1));
    est.density[k] = mean / width;
    est.std_error[k] = std::sqrt(var / n) / width;
  }
  return est;
}

}  // namespace snlevy
