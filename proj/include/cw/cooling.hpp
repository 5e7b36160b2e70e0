#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cw/alpha_law.hpp"

namespace cw {

enum class CoolingFamily { explicit_list, polynomial, exponential, double_exponential, faster, repeated_blocks };

struct Block {
  std::int64_t length;
  std::int64_t count;
};

/// Position of a time inside the cooling schedule.
struct Location {
  std::int64_t interval;       // l(n) = inf{k >= 1 : tau(k) > n}
  std::int64_t tau_prev;       // tau(l(n) - 1)
  std::int64_t boundary_time;  // n - tau(l(n) - 1)
};

/// Largest increment or refreshing time the integer schedule will represent.
inline constexpr std::int64_t kMaxScheduleTime = std::int64_t{1} << 62;

/// Cooling map tau, given by its increments T_k = tau(k) - tau(k-1) >= 1.
///
/// Parametric increments are rounded half away from zero with a floor of 1:
///   polynomial(B, beta)     T_k = max(1, round(B k^beta))
///   exponential(c)          T_k = max(1, round(e^{c k}))
///   double_exponential(c)   T_k = max(1, round(e^{e^{c k}}))
///   faster(c)               T_k = max(1, round(e^{e^{c k^2}}))
/// The rounding rule is part of the output contract. Increments or times
/// beyond 2^62 raise OverflowError. Explicit and block maps are finite and
/// raise OverflowError when asked for increments past their end.
class CoolingMap {
 public:
  static CoolingMap explicit_increments(std::vector<std::int64_t> increments);
  static CoolingMap polynomial(double B, double beta);
  static CoolingMap exponential(double c);
  static CoolingMap double_exponential(double c);
  static CoolingMap faster(double c);
  static CoolingMap repeated_blocks(std::vector<Block> blocks);

  CoolingFamily family() const noexcept { return family_; }
  /// Number of increments for finite maps, -1 for unbounded families.
  std::int64_t finite_length() const noexcept;

  /// T_k for k >= 1.
  std::int64_t increment(std::int64_t k) const;
  /// Natural log of the unrounded T_k. Stays finite where the integer
  /// increment would overflow; used by asymptotic variance models.
  double log_increment(std::int64_t k) const;
  /// tau(k), with tau(0) = 0.
  std::int64_t tau(std::int64_t k) const;

  Location locate(std::int64_t n) const;
  /// tau(0), tau(1), ..., tau(l(n)): every refreshing time up to the first one beyond n.
  std::vector<std::int64_t> refreshing_times(std::int64_t n) const;

  /// Config grammar form, e.g. `polynomial(B=1,beta=2)` or `blocks=[(1,10),(3,2)]`.
  std::string describe() const;

  double parameter_b() const noexcept { return p0_; }
  double parameter_beta() const noexcept { return p1_; }
  double parameter_c() const noexcept { return p0_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }

 private:
  CoolingFamily family_ = CoolingFamily::explicit_list;
  double p0_ = 0.0;
  double p1_ = 0.0;
  std::vector<std::int64_t> increments_;
  std::vector<Block> blocks_;
};

struct DivergenceReport {
  std::int64_t horizon = 0;
  double gamma = 0.0;
  // min T_k over the last decade (horizon/10, horizon] against the decade before it.
  double last_decade_min = 0.0;
  double previous_decade_min = 0.0;
  bool increments_diverge = false;
  std::vector<double> cesaro_mean;  // (1/l) sum_{k<=l} T_k for l = 1..horizon
  bool cesaro_diverges = false;
  // running minimum over k of k^{-gamma} log T_k, and its last-decade value
  std::vector<double> fast_cooling_running_min;
  double fast_cooling_last_decade = 0.0;
  bool fast_cooling = false;
  // These are finite-horizon proxies for limit statements; never certificates.
  const char* note = "finite-horizon proxies";
};

/// Finite-horizon proxies for T_k -> infinity, Cesaro divergence, and
/// liminf k^{-gamma} log T_k > 0. `fast_threshold` decides the last flag.
DivergenceReport divergence_report(const CoolingMap& map, std::int64_t horizon, double gamma,
                                   double fast_threshold = 0.1);

struct MeanEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};

using MeanOracle = std::function<MeanEstimate(std::int64_t n)>;

struct BreakerBlock {
  std::int64_t length = 0;  // n_j
  std::int64_t count = 0;   // N_j
  MeanEstimate mean;        // oracle estimate of E[Z_{n_j}] that justified the block
};

struct BreakerOptions {
  double margin = 5.0;  // standard errors above zero required for membership in N_+
  std::size_t max_blocks = 3;
  std::int64_t last_count = 100;  // N for the final block
  std::int64_t max_total_time = std::int64_t{1} << 40;
};

struct RecurrenceBreaker {
  CoolingMap map;
  std::vector<BreakerBlock> blocks;            // provenance
  std::vector<std::int64_t> rejected_lengths;  // grid points not significantly positive
};

/// Builds a repeated-block cooling map from grid points whose annealed mean is
/// significantly positive. Counts satisfy (1/2) N_j E[Z_{n_j}] >= (N_{j+1} + 1) n_{j+1},
/// solved backward from the last block. Throws NotFoundError when no grid
/// point qualifies and InfeasibleError when the schedule exceeds max_total_time.
RecurrenceBreaker build_recurrence_breaker(const AlphaLaw& alpha, const MeanOracle& mean_oracle,
                                           const std::vector<std::int64_t>& n_grid,
                                           const BreakerOptions& options = {});

}  // namespace cw
