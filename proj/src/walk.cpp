#include "cw/walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cw/error.hpp"
#include "cw/kernels/dp_kernels.hpp"
#include "cw/parallel.hpp"
#include "cw/stats.hpp"

namespace cw {

namespace {

std::size_t resolve_workers(std::size_t workers) { return workers ? workers : default_workers(); }

std::uint64_t step_threshold(double omega) noexcept {
  return static_cast<std::uint64_t>(std::ldexp(omega, 64));
}

// Dense forward DP from a single start site; `sites` holds omega for
// x = origin + i and zero padding where the window ends.
class DpState {
 public:
  DpState(const EnvironmentWindow& env, std::int64_t start, std::int64_t n) : start_(start), n_(n) {
    const std::size_t size = static_cast<std::size_t>(2 * n + 3);
    origin_ = start - n - 1;
    up_.assign(size, 0.0);
    down_.assign(size, 0.0);
    for (std::size_t i = 0; i < size; ++i) {
      const std::int64_t x = origin_ + static_cast<std::int64_t>(i);
      if (x < env.lo() || x > env.hi()) continue;
      const double w = env.omega(x);
      up_[i] = w;
      down_[i] = 1.0 - w;
    }
    p_.assign(size, 0.0);
    q_.assign(size, 0.0);
    p_[static_cast<std::size_t>(n + 1)] = 1.0;
  }

  // Advances from time t to t + 1.
  void step(std::int64_t t) {
    const auto first = static_cast<std::size_t>(n_ - t);
    const auto last = static_cast<std::size_t>(n_ + t + 3);
    kernels::dp_step()(p_.data(), up_.data(), down_.data(), q_.data(), first, last);
    p_.swap(q_);
  }

  void moments(std::int64_t t, double out[3]) const {
    const auto first = static_cast<std::size_t>(n_ + 1 - t);
    const auto last = static_cast<std::size_t>(n_ + 2 + t);
    kernels::moments()(p_.data(), static_cast<double>(origin_), first, last, out);
  }

  const std::vector<double>& mass() const noexcept { return p_; }
  std::int64_t origin() const noexcept { return origin_; }

 private:
  std::int64_t start_;
  std::int64_t n_;
  std::int64_t origin_ = 0;
  std::vector<double> up_, down_, p_, q_;
};

void check_dp_request(const EnvironmentWindow& env, std::int64_t start, std::int64_t n,
                      std::int64_t cap) {
  if (n < 0) throw DomainError("time must be non-negative");
  if (n > cap)
    throw CapExceededError("exact DP requested for n = " + std::to_string(n) + " above cap " +
                           std::to_string(cap) + "; use Monte Carlo");
  if (n > 0 && !env.covers(start - (n - 1), start + (n - 1)))
    throw DomainError("environment does not cover the sites the walk can leave from");
}

// Threshold cache for one environment on a growing window of sites, filled
// from the site-keyed hash with a given seed.
class LazyThresholds {
 public:
  explicit LazyThresholds(const AlphaLaw& alpha) {
    double total = 0.0;
    for (const Atom& a : alpha.atoms()) {
      total += a.weight;
      cumulative_.push_back(total);
      atom_threshold_.push_back(step_threshold(a.omega));
    }
  }

  void reset(std::uint64_t seed, std::int64_t center, std::int64_t radius) {
    seed_ = seed;
    lo_ = center - radius;
    thresholds_.resize(static_cast<std::size_t>(2 * radius + 1));
    fill(lo_, 0, thresholds_.size());
  }

  std::uint64_t at(std::int64_t x) {
    std::int64_t i = x - lo_;
    if (i < 0 || i >= static_cast<std::int64_t>(thresholds_.size())) {
      grow(x);
      i = x - lo_;
    }
    return thresholds_[static_cast<std::size_t>(i)];
  }

  std::uint64_t direct(std::uint64_t seed, std::int64_t x) const noexcept {
    return atom_threshold_[site_atom_index(seed, x, cumulative_)];
  }

 private:
  void fill(std::int64_t lo, std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to; ++i)
      thresholds_[i] = direct(seed_, lo + static_cast<std::int64_t>(i));
  }

  void grow(std::int64_t x) {
    const auto size = static_cast<std::int64_t>(thresholds_.size());
    if (x < lo_) {
      const std::int64_t extra = std::max(size, lo_ - x);
      std::vector<std::uint64_t> grown(static_cast<std::size_t>(size + extra));
      std::copy(thresholds_.begin(), thresholds_.end(), grown.begin() + extra);
      thresholds_.swap(grown);
      lo_ -= extra;
      fill(lo_, 0, static_cast<std::size_t>(extra));
    } else {
      const std::int64_t extra = std::max(size, x - (lo_ + size) + 1);
      thresholds_.resize(static_cast<std::size_t>(size + extra));
      fill(lo_, static_cast<std::size_t>(size), thresholds_.size());
    }
  }

  std::vector<double> cumulative_;
  std::vector<std::uint64_t> atom_threshold_;
  std::vector<std::uint64_t> thresholds_;
  std::uint64_t seed_ = 0;
  std::int64_t lo_ = 0;
};

// Intervals up to this length read thresholds straight from the hash.
constexpr std::int64_t kDirectHashMaxLength = 16;
constexpr std::int64_t kInitialRadius = 32;

}  // namespace

double QuenchedDistribution::at(std::int64_t x) const noexcept {
  if (x < lo() || x > hi()) return 0.0;
  return mass[static_cast<std::size_t>(x - lo())];
}

double QuenchedDistribution::mean() const noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) m += mass[i] * static_cast<double>(lo() + static_cast<std::int64_t>(i));
  return m;
}

double QuenchedDistribution::second_moment() const noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    const double x = static_cast<double>(lo() + static_cast<std::int64_t>(i));
    m += mass[i] * x * x;
  }
  return m;
}

QuenchedDistribution exact_quenched_distribution(const EnvironmentWindow& env, std::int64_t start,
                                                 std::int64_t n, std::int64_t cap) {
  check_dp_request(env, start, n, cap);
  DpState dp(env, start, n);
  for (std::int64_t t = 0; t < n; ++t) dp.step(t);
  QuenchedDistribution out;
  out.time = n;
  out.start = start;
  const auto& m = dp.mass();
  out.mass.assign(m.begin() + 1, m.end() - 1);
  return out;
}

std::vector<QuenchedMoments> quenched_moments(const EnvironmentWindow& env,
                                              const std::vector<std::int64_t>& times,
                                              std::int64_t cap) {
  if (times.empty()) return {};
  const std::int64_t n = *std::max_element(times.begin(), times.end());
  check_dp_request(env, 0, n, cap);
  std::vector<std::int64_t> order(times);
  std::sort(order.begin(), order.end());
  DpState dp(env, 0, n);
  std::vector<QuenchedMoments> by_time;
  std::size_t next = 0;
  for (std::int64_t t = 0; next < order.size(); ++t) {
    while (next < order.size() && order[next] == t) {
      if (t < 0) throw DomainError("times must be non-negative");
      double m[3];
      dp.moments(t, m);
      by_time.push_back({t, m[1], m[2]});
      ++next;
    }
    if (next < order.size()) dp.step(t);
  }
  std::vector<QuenchedMoments> out;
  out.reserve(times.size());
  for (std::int64_t t : times)
    out.push_back(*std::find_if(by_time.begin(), by_time.end(),
                                [t](const QuenchedMoments& q) { return q.time == t; }));
  return out;
}

std::uint64_t walk_stream_seed(std::uint64_t seed, std::uint64_t replica) noexcept {
  return derive_seed(derive_seed(seed, replica, 0), kWalkStreamTag, 0);
}

TrajectoryBatch simulate_rwre(const EnvironmentWindow& env, std::int64_t start, std::int64_t n,
                              std::size_t replicas, std::uint64_t seed,
                              const SimulationOptions& options) {
  if (n < 0) throw DomainError("time must be non-negative");
  EnvironmentWindow window = env;
  window.extend(std::min<std::int64_t>(start - n, 0), std::max<std::int64_t>(start + n, 0));
  const std::int64_t lo = window.lo();
  std::vector<std::uint64_t> thresholds;
  thresholds.reserve(window.values().size());
  for (double w : window.values()) thresholds.push_back(step_threshold(w));

  TrajectoryBatch batch;
  batch.time = n;
  batch.start = start;
  batch.final_positions.assign(replicas, 0);
  if (options.record_leftmost) batch.leftmost.assign(replicas, 0);
  parallel_for(replicas, resolve_workers(options.workers), [&](std::size_t r) {
    SplitMix64 rng(walk_stream_seed(seed, r));
    std::int64_t x = start;
    std::int64_t low = start;
    for (std::int64_t t = 0; t < n; ++t) {
      x += rng.next() < thresholds[static_cast<std::size_t>(x - lo)] ? 1 : -1;
      low = std::min(low, x);
    }
    batch.final_positions[r] = x;
    if (options.record_leftmost) batch.leftmost[r] = low;
  });
  return batch;
}

TrajectoryBatch simulate_rwcre(const AlphaLaw& alpha, const CoolingMap& map, std::int64_t n,
                               std::size_t replicas, std::uint64_t seed,
                               const SimulationOptions& options) {
  if (n < 0) throw DomainError("time must be non-negative");
  // A finite map may be run exactly to its end; its last interval then acts as the boundary stretch.
  const std::int64_t end = map.finite_length();
  const bool at_end = n > 0 && end > 0 && n == map.tau(end);
  const std::vector<std::int64_t> times = map.refreshing_times(at_end ? n - 1 : n);
  // Full intervals 1..l(n)-1, then the boundary stretch.
  const std::size_t full = times.size() - 2;
  std::vector<std::int64_t> lengths;
  for (std::size_t k = 1; k <= full; ++k) lengths.push_back(times[k] - times[k - 1]);
  lengths.push_back(n - times[full]);

  const std::vector<std::int64_t>& checks = options.checkpoints;
  for (std::size_t i = 0; i < checks.size(); ++i)
    if (checks[i] < 0 || checks[i] > n || (i > 0 && checks[i] < checks[i - 1]))
      throw DomainError("checkpoints must be non-decreasing times in [0, n]");

  TrajectoryBatch batch;
  batch.time = n;
  batch.final_positions.assign(replicas, 0);
  if (options.record_leftmost) batch.leftmost.assign(replicas, 0);
  if (options.record_increments) {
    batch.increments_per_replica = lengths.size();
    batch.increments.assign(replicas * lengths.size(), 0);
  }
  batch.checkpoints_per_replica = checks.size();
  batch.checkpoint_positions.assign(replicas * checks.size(), 0);

  parallel_for(replicas, resolve_workers(options.workers), [&](std::size_t r) {
    SplitMix64 rng(walk_stream_seed(seed, r));
    LazyThresholds env(alpha);
    std::int64_t x = 0;
    std::int64_t low = 0;
    std::int64_t now = 0;
    std::size_t next_check = 0;
    std::int64_t* saved = batch.checkpoint_positions.data() + r * checks.size();
    const auto record_due = [&] {
      while (next_check < checks.size() && checks[next_check] == now) saved[next_check++] = x;
    };
    record_due();
    for (std::size_t k = 0; k < lengths.size(); ++k) {
      const std::uint64_t env_seed = derive_seed(seed, r, k + 1);
      const std::int64_t begin = x;
      const bool direct = lengths[k] <= kDirectHashMaxLength;
      if (!direct) env.reset(env_seed, x, kInitialRadius);
      const std::int64_t stop = now + lengths[k];
      while (now < stop) {
        const std::int64_t chunk_end =
            next_check < checks.size() ? std::min(stop, std::max(checks[next_check], now + 1)) : stop;
        if (direct) {
          for (; now < chunk_end; ++now) {
            x += rng.next() < env.direct(env_seed, x) ? 1 : -1;
            low = std::min(low, x);
          }
        } else {
          for (; now < chunk_end; ++now) {
            x += rng.next() < env.at(x) ? 1 : -1;
            low = std::min(low, x);
          }
        }
        record_due();
      }
      if (options.record_increments) batch.increments[r * lengths.size() + k] = x - begin;
    }
    batch.final_positions[r] = x;
    if (options.record_leftmost) batch.leftmost[r] = low;
  });
  return batch;
}

TrajectoryBatch simulate_rwre_annealed(const AlphaLaw& alpha, std::int64_t n,
                                       std::size_t replicas, std::uint64_t seed,
                                       const SimulationOptions& options) {
  SimulationOptions plain = options;
  plain.record_increments = false;
  return simulate_rwcre(alpha, CoolingMap::explicit_increments({n + 1}), n, replicas, seed, plain);
}

std::vector<MeanEstimate> annealed_means(const AlphaLaw& alpha, const std::vector<std::int64_t>& times,
                                         std::size_t env_samples, std::uint64_t seed,
                                         std::size_t workers) {
  if (env_samples == 0) throw DomainError("annealed means need at least one environment");
  if (times.empty()) return {};
  const std::int64_t n = *std::max_element(times.begin(), times.end());
  if (n > kDefaultDpCap)
    throw CapExceededError("annealed means use exact DP; n = " + std::to_string(n) +
                           " exceeds the cap " + std::to_string(kDefaultDpCap));
  std::vector<std::vector<double>> means(env_samples);
  parallel_for(env_samples, resolve_workers(workers), [&](std::size_t i) {
    const std::int64_t radius = std::max<std::int64_t>(n, 1);
    EnvironmentWindow env(alpha, derive_seed(seed, i, 0), -radius, radius);
    const auto q = quenched_moments(env, times);
    means[i].reserve(q.size());
    for (const auto& m : q) means[i].push_back(m.mean);
  });
  std::vector<MeanEstimate> out;
  for (std::size_t j = 0; j < times.size(); ++j) {
    MomentAccumulator acc;
    for (std::size_t i = 0; i < env_samples; ++i) acc.add(means[i][j]);
    const double se = env_samples > 1 ? std::sqrt(acc.variance() / static_cast<double>(env_samples)) : 0.0;
    out.push_back({acc.mean(), se});
  }
  return out;
}

MeanEstimate annealed_mean(const AlphaLaw& alpha, std::int64_t n, std::size_t env_samples,
                           std::uint64_t seed, std::size_t workers) {
  return annealed_means(alpha, {n}, env_samples, seed, workers).front();
}

namespace {

void check_interval(const EnvironmentWindow& env, std::int64_t x, std::int64_t a, std::int64_t b) {
  if (!(a < x && x < b)) throw DomainError("hitting problems need a < x < b");
  if (!env.covers(a, b)) throw DomainError("environment does not cover [a, b]");
}

// log sum_{i=from}^{to-1} e^{U(i)} with U anchored at U(a) = 0.
struct PotentialSums {
  std::vector<double> u;  // U(a..b-1)
  double max_u = -HUGE_VAL;

  PotentialSums(const EnvironmentWindow& env, std::int64_t a, std::int64_t b) {
    u.reserve(static_cast<std::size_t>(b - a));
    double acc = 0.0;
    for (std::int64_t i = a; i < b; ++i) {
      if (i > a) acc += std::log(rho(env.omega(i)));
      u.push_back(acc);
      max_u = std::max(max_u, acc);
    }
  }

  double scaled_sum(std::size_t from, std::size_t to) const {
    double s = 0.0;
    for (std::size_t i = from; i < to; ++i) s += std::exp(u[i] - max_u);
    return s;
  }
};

// Thomas algorithm for sub/main/super diagonals; rhs overwritten with the solution.
void solve_tridiagonal(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup,
                       std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

}  // namespace

double hit_prob(const EnvironmentWindow& env, std::int64_t x, std::int64_t a, std::int64_t b) {
  check_interval(env, x, a, b);
  const PotentialSums s(env, a, b);
  const auto from = static_cast<std::size_t>(x - a);
  return s.scaled_sum(from, s.u.size()) / s.scaled_sum(0, s.u.size());
}

double hit_prob_complement(const EnvironmentWindow& env, std::int64_t x, std::int64_t a,
                           std::int64_t b) {
  check_interval(env, x, a, b);
  const PotentialSums s(env, a, b);
  const auto to = static_cast<std::size_t>(x - a);
  return s.scaled_sum(0, to) / s.scaled_sum(0, s.u.size());
}

double hit_prob_linear_solve(const EnvironmentWindow& env, std::int64_t x, std::int64_t a,
                             std::int64_t b) {
  check_interval(env, x, a, b);
  const auto n = static_cast<std::size_t>(b - a - 1);  // unknowns h(a+1..b-1)
  std::vector<double> sub(n), diag(n, 1.0), sup(n), rhs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = env.omega(a + 1 + static_cast<std::int64_t>(i));
    sub[i] = -(1.0 - w);
    sup[i] = -w;
  }
  rhs[0] = 1.0 - env.omega(a + 1);  // h(a) = 1 moved to the right-hand side
  solve_tridiagonal(sub, diag, sup, rhs);
  return rhs[static_cast<std::size_t>(x - a - 1)];
}

MeanEstimate hit_prob_monte_carlo(const EnvironmentWindow& env, std::int64_t x, std::int64_t a,
                                  std::int64_t b, std::size_t replicas, std::uint64_t seed,
                                  std::size_t workers) {
  check_interval(env, x, a, b);
  if (replicas < 2) throw DomainError("hit_prob_monte_carlo needs at least 2 replicas");
  std::vector<std::uint64_t> thresholds;
  for (std::int64_t i = a; i <= b; ++i) thresholds.push_back(step_threshold(env.omega(i)));
  std::vector<unsigned char> hit_a(replicas);
  parallel_for(replicas, resolve_workers(workers), [&](std::size_t r) {
    SplitMix64 rng(walk_stream_seed(seed, r));
    std::int64_t y = x;
    while (y != a && y != b) y += rng.next() < thresholds[static_cast<std::size_t>(y - a)] ? 1 : -1;
    hit_a[r] = y == a;
  });
  std::size_t count = 0;
  for (unsigned char h : hit_a) count += h;
  const double p = static_cast<double>(count) / static_cast<double>(replicas);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(replicas))};
}

double expected_hit_time_reflected(const EnvironmentWindow& env, std::int64_t a, std::int64_t b,
                                   std::int64_t start) {
  if (!(a <= start && start < b)) throw DomainError("reflected hitting time needs a <= start < b");
  if (!env.covers(a, b)) throw DomainError("environment does not cover [a, b]");
  double t = 1.0;  // t_{a+1}
  double total = start < a + 1 ? t : 0.0;
  for (std::int64_t i = a + 2; i <= b; ++i) {
    const double w = env.omega(i - 1);
    t = 1.0 / w + rho(w) * t;
    if (i > start) total += t;
  }
  return total;
}

double expected_hit_time_linear_solve(const EnvironmentWindow& env, std::int64_t a, std::int64_t b,
                                      std::int64_t start) {
  if (!(a <= start && start < b)) throw DomainError("reflected hitting time needs a <= start < b");
  if (!env.covers(a, b)) throw DomainError("environment does not cover [a, b]");
  const auto n = static_cast<std::size_t>(b - a);  // unknowns h(a..b-1)
  std::vector<double> sub(n, 0.0), diag(n, 1.0), sup(n, 0.0), rhs(n, 1.0);
  sup[0] = -1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double w = env.omega(a + static_cast<std::int64_t>(i));
    sub[i] = -(1.0 - w);
    sup[i] = i + 1 < n ? -w : 0.0;
  }
  solve_tridiagonal(sub, diag, sup, rhs);
  return rhs[static_cast<std::size_t>(start - a)];
}

LeftmostRecordReport leftmost_record_tail(const AlphaLaw& alpha, std::int64_t m_max,
                                          std::int64_t n_cap, std::size_t replicas,
                                          std::uint64_t seed, std::size_t workers) {
  LeftmostRecordReport r;
  r.horizon = n_cap;
  if (classify(alpha) != Regime::right_transient) {
    r.diverging = true;
    r.bias_note = "recurrent or left-transient law: the leftmost record is -infinity almost surely";
    return r;
  }
  if (m_max < 1 || replicas < 2) throw DomainError("leftmost record tail needs m_max >= 1 and >= 2 replicas");
  SimulationOptions options;
  options.workers = workers;
  options.record_leftmost = true;
  const TrajectoryBatch batch = simulate_rwre_annealed(alpha, n_cap, replicas, seed, options);

  const double count = static_cast<double>(replicas);
  std::vector<double> depths;
  depths.reserve(replicas);
  for (std::int64_t w : batch.leftmost) depths.push_back(static_cast<double>(-w));
  const MomentsReport m = moments_with_se(depths);
  r.mean_depth = m.mean;
  r.mean_depth_se = m.mean_se;

  std::vector<double> ms, logs;
  for (std::int64_t level = 1; level <= m_max; ++level) {
    const double hits = static_cast<double>(std::count_if(
        batch.leftmost.begin(), batch.leftmost.end(), [level](std::int64_t w) { return w <= -level; }));
    const double p = hits / count;
    r.tail.push_back(p);
    r.tail_se.push_back(std::sqrt(p * (1.0 - p) / count));
    if (hits > 0) {
      ms.push_back(static_cast<double>(level));
      logs.push_back(std::log(p));
    }
  }
  if (ms.size() >= 2) {
    const LinearFit fit = least_squares(ms, logs);
    r.tail_exponent = fit.slope;
    r.tail_r_squared = fit.r_squared;
  }
  r.bias_note = "records set after step " + std::to_string(n_cap) +
                " are missed, so tail and mean estimates are biased low";
  return r;
}

}  // namespace cw
