#pragma once

#include "snlevy/levy_model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace snlevy {

struct SimConfig {
  double beta = 0.0;
  double start = 1.0;
  std::optional<double> barrier;
  double dt = 0.01;
  std::int64_t cap_particles = 1'000'000;
  std::int64_t replicates = 0;
  std::uint64_t master_seed = 0;
  /// 0 picks SNLEVY_THREADS, else the hardware concurrency.
  unsigned workers = 0;

  /// Throws ArgumentError on a violated invariant.
  void validate() const;
};

struct ReplicateOutcome {
  /// Particles absorbed below 0 (with a barrier: only those whose ancestry
  /// stayed inside (0, barrier)).
  std::int64_t z0 = 0;
  /// Overall maximum position, barrier exits excluded.
  double max_pos = 0.0;
  /// Particles ever created, root included: 2 (z0 + exited_up) - 1 when uncensored.
  std::int64_t total_particles = 1;
  bool censored = false;
  std::int64_t exited_up = 0;

  friend bool operator==(const ReplicateOutcome&, const ReplicateOutcome&) = default;
};

struct RunStats {
  double wall_seconds = 0.0;
  unsigned workers = 1;
};

struct Dataset {
  LevyModel model;
  SimConfig config;
  std::vector<ReplicateOutcome> outcomes;
  RunStats stats;
};

struct DatasetSummary {
  std::int64_t replicates;
  double mean_z0;
  double var_z0;
  double se_z0;
  double mean_z0_sq;
  double se_z0_sq;
  double censored_fraction;
  std::int64_t censored;
};

DatasetSummary summarize(const Dataset& dataset);

/// Worker count used when config.workers == 0.
unsigned default_workers();

/// One replicate. Particles draw their randomness from per-particle substreams
/// of (master_seed, stream_index), so the outcome does not depend on traversal
/// order and runs with different barriers are coupled path by path.
ReplicateOutcome simulate_replicate(const LevyModel& model, const SimConfig& config,
                                    std::uint32_t stream_index);

/// Replicate i uses stream i. Requires beta <= q_star (RegimeError otherwise).
/// Throws PartialDatasetError when memory runs out.
Dataset simulate_batch(const LevyModel& model, const SimConfig& config);

/// Undershoots L at first passage below 0 of a single particle under the model
/// tilted by tilt_c. Creeping gives exactly 0. Requires psi'(tilt_c) <= 0 so
/// that passage happens a.s.
std::vector<double> simulate_first_passage(const LevyModel& model, double a, double tilt_c,
                                           std::int64_t replicates, std::uint64_t seed,
                                           unsigned workers = 0);

struct OccupationEstimate {
  std::vector<double> edges;
  /// Mean occupation time per replicate divided by bin width.
  std::vector<double> density;
  std::vector<double> std_error;
};

/// Expected occupation density of all particles in the bins given by `edges`
/// (trapezoidal rule along the simulation grid). beta may be 0 here, in which
/// case a single particle runs until it leaves (0, barrier).
OccupationEstimate simulate_occupation(const LevyModel& model, const SimConfig& config,
                                       std::span<const double> edges);

}  // namespace snlevy
