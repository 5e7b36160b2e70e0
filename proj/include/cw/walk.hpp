#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cw/alpha_law.hpp"
#include "cw/cooling.hpp"
#include "cw/environment.hpp"

namespace cw {

inline constexpr std::int64_t kDefaultDpCap = 4096;

/// Exact law of Z_n under P^omega_start.
struct QuenchedDistribution {
  std::int64_t time = 0;
  std::int64_t start = 0;
  std::vector<double> mass;  // mass[i] = P(Z_n = start - n + i), i in [0, 2n]

  std::int64_t lo() const noexcept { return start - time; }
  std::int64_t hi() const noexcept { return start + time; }
  double at(std::int64_t x) const noexcept;
  double mean() const noexcept;
  double second_moment() const noexcept;
};

/// Forward DP mass(x, t+1) = mass(x-1, t) omega(x-1) + mass(x+1, t) (1 - omega(x+1)).
/// Throws CapExceededError when n > cap and DomainError when env misses a reachable site.
QuenchedDistribution exact_quenched_distribution(const EnvironmentWindow& env, std::int64_t start,
                                                 std::int64_t n,
                                                 std::int64_t cap = kDefaultDpCap);

struct QuenchedMoments {
  std::int64_t time = 0;
  double mean = 0.0;
  double second_moment = 0.0;
};

/// E^omega[Z_t] and E^omega[Z_t^2] from start 0 at every t in `times`, from one DP pass.
std::vector<QuenchedMoments> quenched_moments(const EnvironmentWindow& env,
                                              const std::vector<std::int64_t>& times,
                                              std::int64_t cap = kDefaultDpCap);

/// Per-replica results of a Monte Carlo batch.
struct TrajectoryBatch {
  std::int64_t time = 0;
  std::int64_t start = 0;
  std::vector<std::int64_t> final_positions;
  std::vector<std::int64_t> leftmost;  // min_{t <= n} Z_t, when requested
  // Y_1, ..., Y_{l(n)-1} then the boundary increment, per replica, when requested.
  std::vector<std::int64_t> increments;
  std::size_t increments_per_replica = 0;
  // Z at each requested checkpoint time, per replica (simulate_rwcre only).
  std::vector<std::int64_t> checkpoint_positions;
  std::size_t checkpoints_per_replica = 0;

  std::size_t replicas() const noexcept { return final_positions.size(); }
};

struct SimulationOptions {
  std::size_t workers = 0;  // 0 selects default_workers()
  bool record_leftmost = false;
  bool record_increments = false;
  std::vector<std::int64_t> checkpoints;  // non-decreasing times in [0, n]
};

/// Seeds: replica r walks with SplitMix64(derive_seed(derive_seed(seed, r, 0), kWalkStreamTag, 0)).
inline constexpr std::uint64_t kWalkStreamTag = 0x57414c4bULL;
std::uint64_t walk_stream_seed(std::uint64_t seed, std::uint64_t replica) noexcept;

/// Quenched batch: every replica walks in the same environment. The window is
/// extended as needed through its site field.
TrajectoryBatch simulate_rwre(const EnvironmentWindow& env, std::int64_t start, std::int64_t n,
                              std::size_t replicas, std::uint64_t seed,
                              const SimulationOptions& options = {});

/// RWCRE batch. Replica r samples interval k's environment from the site field
/// with seed derive_seed(seed, r, k); the walker keeps its position across refreshes.
TrajectoryBatch simulate_rwcre(const AlphaLaw& alpha, const CoolingMap& map, std::int64_t n,
                               std::size_t replicas, std::uint64_t seed,
                               const SimulationOptions& options = {});

/// Annealed RWRE: each replica draws its own environment (seed derive_seed(seed, r, 1)).
TrajectoryBatch simulate_rwre_annealed(const AlphaLaw& alpha, std::int64_t n,
                                       std::size_t replicas, std::uint64_t seed,
                                       const SimulationOptions& options = {});

/// Estimate of E^mu_0[Z_n] averaging exact quenched means over sampled environments.
/// Environment i uses seed derive_seed(seed, i, 0).
MeanEstimate annealed_mean(const AlphaLaw& alpha, std::int64_t n, std::size_t env_samples,
                           std::uint64_t seed, std::size_t workers = 0);

/// Same for every n in `times` from one DP per environment.
std::vector<MeanEstimate> annealed_means(const AlphaLaw& alpha, const std::vector<std::int64_t>& times,
                                         std::size_t env_samples, std::uint64_t seed,
                                         std::size_t workers = 0);

/// P^omega_x(H_a < H_b) = sum_{i=x}^{b-1} e^{U(i)} / sum_{i=a}^{b-1} e^{U(i)}.
double hit_prob(const EnvironmentWindow& env, std::int64_t x, std::int64_t a, std::int64_t b);
/// P^omega_x(H_b < H_a) = sum_{i=a}^{x-1} e^{U(i)} / sum_{i=a}^{b-1} e^{U(i)}.
double hit_prob_complement(const EnvironmentWindow& env, std::int64_t x, std::int64_t a,
                           std::int64_t b);
/// Same probability from the absorbing-chain linear system (tridiagonal solve).
double hit_prob_linear_solve(const EnvironmentWindow& env, std::int64_t x, std::int64_t a,
                             std::int64_t b);

/// Monte Carlo frequency of {H_a < H_b} from x; replica r walks with walk_stream_seed(seed, r).
MeanEstimate hit_prob_monte_carlo(const EnvironmentWindow& env, std::int64_t x, std::int64_t a,
                                  std::int64_t b, std::size_t replicas, std::uint64_t seed,
                                  std::size_t workers = 0);

/// Expected hitting time of b for the walk reflected at a (a moves to a + 1
/// with probability one), started at `start`:
///   E = sum_{i=start+1}^{b} t_i,  t_{a+1} = 1,  t_i = 1/omega(i-1) + rho(i-1) t_{i-1}
/// where t_i is the expected time to step from i - 1 to i.
double expected_hit_time_reflected(const EnvironmentWindow& env, std::int64_t a, std::int64_t b,
                                   std::int64_t start);
/// Same quantity from the linear system h(a) = 1 + h(a+1), h(y) = 1 + omega h(y+1) + (1-omega) h(y-1), h(b) = 0.
double expected_hit_time_linear_solve(const EnvironmentWindow& env, std::int64_t a, std::int64_t b,
                                      std::int64_t start);

struct LeftmostRecordReport {
  bool diverging = false;  // recurrent or left-transient input: W = -infinity a.s.
  std::vector<double> tail;  // tail[m-1] = estimate of P(W <= -m), m = 1..m_max
  std::vector<double> tail_se;
  double mean_depth = 0.0;  // estimate of E[-W]
  double mean_depth_se = 0.0;
  double tail_exponent = 0.0;  // slope of log P(W <= -m) against m
  double tail_r_squared = 0.0;
  std::int64_t horizon = 0;
  std::string bias_note;
};

/// Annealed Monte Carlo estimate of the leftmost record W = inf_n Z_n, truncated at n_cap steps.
LeftmostRecordReport leftmost_record_tail(const AlphaLaw& alpha, std::int64_t m_max,
                                          std::int64_t n_cap, std::size_t replicas,
                                          std::uint64_t seed, std::size_t workers = 0);

}  // namespace cw
