#include "cw/cooling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cw/error.hpp"

namespace cw {

namespace {

const double kLogMaxTime = std::log(static_cast<double>(kMaxScheduleTime));

std::int64_t round_increment(double log_value, std::int64_t k) {
  if (!(log_value < kLogMaxTime))
    throw OverflowError("cooling increment T_" + std::to_string(k) + " exceeds 2^62");
  const double value = std::round(std::exp(log_value));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(value));
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  out << v;
  return out.str();
}

}  // namespace

CoolingMap CoolingMap::explicit_increments(std::vector<std::int64_t> increments) {
  if (increments.empty()) throw DomainError("explicit cooling map needs at least one increment");
  for (auto t : increments)
    if (t < 1) throw DomainError("cooling increments must be >= 1");
  CoolingMap m;
  m.family_ = CoolingFamily::explicit_list;
  m.increments_ = std::move(increments);
  return m;
}

CoolingMap CoolingMap::polynomial(double B, double beta) {
  if (!(B > 0.0 && beta > 0.0)) throw DomainError("polynomial cooling needs B > 0 and beta > 0");
  CoolingMap m;
  m.family_ = CoolingFamily::polynomial;
  m.p0_ = B;
  m.p1_ = beta;
  return m;
}

CoolingMap CoolingMap::exponential(double c) {
  if (!(c > 0.0)) throw DomainError("exponential cooling needs c > 0");
  CoolingMap m;
  m.family_ = CoolingFamily::exponential;
  m.p0_ = c;
  return m;
}

CoolingMap CoolingMap::double_exponential(double c) {
  if (!(c > 0.0)) throw DomainError("double exponential cooling needs c > 0");
  CoolingMap m;
  m.family_ = CoolingFamily::double_exponential;
  m.p0_ = c;
  return m;
}

CoolingMap CoolingMap::faster(double c) {
  if (!(c > 0.0)) throw DomainError("faster cooling needs c > 0");
  CoolingMap m;
  m.family_ = CoolingFamily::faster;
  m.p0_ = c;
  return m;
}

CoolingMap CoolingMap::repeated_blocks(std::vector<Block> blocks) {
  if (blocks.empty()) throw DomainError("block cooling map needs at least one block");
  for (const Block& b : blocks)
    if (b.length < 1 || b.count < 1) throw DomainError("block lengths and counts must be >= 1");
  CoolingMap m;
  m.family_ = CoolingFamily::repeated_blocks;
  m.blocks_ = std::move(blocks);
  return m;
}

std::int64_t CoolingMap::finite_length() const noexcept {
  switch (family_) {
    case CoolingFamily::explicit_list: return static_cast<std::int64_t>(increments_.size());
    case CoolingFamily::repeated_blocks: {
      std::int64_t total = 0;
      for (const Block& b : blocks_) total += b.count;
      return total;
    }
    default: return -1;
  }
}

double CoolingMap::log_increment(std::int64_t k) const {
  if (k < 1) throw DomainError("cooling increments are indexed from k = 1");
  const double dk = static_cast<double>(k);
  switch (family_) {
    case CoolingFamily::polynomial: return std::log(p0_) + p1_ * std::log(dk);
    case CoolingFamily::exponential: return p0_ * dk;
    case CoolingFamily::double_exponential: return std::exp(p0_ * dk);
    case CoolingFamily::faster: return std::exp(p0_ * dk * dk);
    default: return std::log(static_cast<double>(increment(k)));
  }
}

std::int64_t CoolingMap::increment(std::int64_t k) const {
  if (k < 1) throw DomainError("cooling increments are indexed from k = 1");
  switch (family_) {
    case CoolingFamily::explicit_list:
      if (k > static_cast<std::int64_t>(increments_.size()))
        throw OverflowError("explicit cooling map has only " + std::to_string(increments_.size()) +
                            " increments");
      return increments_[static_cast<std::size_t>(k - 1)];
    case CoolingFamily::repeated_blocks: {
      std::int64_t remaining = k;
      for (const Block& b : blocks_) {
        if (remaining <= b.count) return b.length;
        remaining -= b.count;
      }
      throw OverflowError("block cooling map has only " + std::to_string(finite_length()) +
                          " increments");
    }
    default: return round_increment(log_increment(k), k);
  }
}

std::int64_t CoolingMap::tau(std::int64_t k) const {
  std::int64_t t = 0;
  for (std::int64_t i = 1; i <= k; ++i) {
    const std::int64_t inc = increment(i);
    if (inc > kMaxScheduleTime - t) throw OverflowError("refreshing time tau(k) exceeds 2^62");
    t += inc;
  }
  return t;
}

Location CoolingMap::locate(std::int64_t n) const {
  if (n < 0) throw DomainError("locate needs n >= 0");
  std::int64_t k = 1;
  std::int64_t prev = 0;
  for (;;) {
    const std::int64_t inc = increment(k);
    if (inc > kMaxScheduleTime - prev) throw OverflowError("refreshing time tau(k) exceeds 2^62");
    const std::int64_t next = prev + inc;
    if (next > n) return {k, prev, n - prev};
    prev = next;
    ++k;
  }
}

std::vector<std::int64_t> CoolingMap::refreshing_times(std::int64_t n) const {
  const Location loc = locate(n);
  std::vector<std::int64_t> times;
  times.reserve(static_cast<std::size_t>(loc.interval) + 1);
  times.push_back(0);
  for (std::int64_t k = 1; k <= loc.interval; ++k) times.push_back(times.back() + increment(k));
  return times;
}

std::string CoolingMap::describe() const {
  std::ostringstream out;
  switch (family_) {
    case CoolingFamily::explicit_list:
      out << "explicit([";
      for (std::size_t i = 0; i < increments_.size(); ++i) out << (i ? "," : "") << increments_[i];
      out << "])";
      break;
    case CoolingFamily::polynomial:
      out << "polynomial(B=" << format_double(p0_) << ",beta=" << format_double(p1_) << ")";
      break;
    case CoolingFamily::exponential: out << "exponential(c=" << format_double(p0_) << ")"; break;
    case CoolingFamily::double_exponential:
      out << "doubleexp(c=" << format_double(p0_) << ")";
      break;
    case CoolingFamily::faster: out << "faster(c=" << format_double(p0_) << ")"; break;
    case CoolingFamily::repeated_blocks:
      out << "blocks=[";
      for (std::size_t i = 0; i < blocks_.size(); ++i)
        out << (i ? "," : "") << '(' << blocks_[i].length << ',' << blocks_[i].count << ')';
      out << "]";
      break;
  }
  return out.str();
}

DivergenceReport divergence_report(const CoolingMap& map, std::int64_t horizon, double gamma,
                                   double fast_threshold) {
  if (horizon < 10) throw DomainError("divergence_report needs horizon >= 10");
  DivergenceReport r;
  r.horizon = horizon;
  r.gamma = gamma;
  const std::int64_t last_start = horizon / 10 + 1;
  const std::int64_t prev_start = horizon / 100 + 1;

  r.last_decade_min = HUGE_VAL;
  r.previous_decade_min = HUGE_VAL;
  r.fast_cooling_last_decade = HUGE_VAL;
  double running_sum = 0.0;
  double running_min = HUGE_VAL;
  r.cesaro_mean.reserve(static_cast<std::size_t>(horizon));
  r.fast_cooling_running_min.reserve(static_cast<std::size_t>(horizon));
  for (std::int64_t k = 1; k <= horizon; ++k) {
    const double log_t = map.log_increment(k);
    // Rounded increments where representable; the unrounded value otherwise.
    double t = std::exp(log_t);
    double log_rounded = log_t;
    if (log_t < kLogMaxTime) {
      t = static_cast<double>(map.increment(k));
      log_rounded = std::log(t);
    }
    running_sum += t;
    r.cesaro_mean.push_back(running_sum / static_cast<double>(k));
    const double ratio = log_rounded / std::pow(static_cast<double>(k), gamma);
    running_min = std::min(running_min, ratio);
    r.fast_cooling_running_min.push_back(running_min);
    if (k >= last_start) {
      r.last_decade_min = std::min(r.last_decade_min, t);
      r.fast_cooling_last_decade = std::min(r.fast_cooling_last_decade, ratio);
    } else if (k >= prev_start) {
      r.previous_decade_min = std::min(r.previous_decade_min, t);
    }
  }
  r.increments_diverge = r.last_decade_min > r.previous_decade_min;
  const double early = r.cesaro_mean[static_cast<std::size_t>(last_start - 2 < 0 ? 0 : last_start - 2)];
  r.cesaro_diverges = r.cesaro_mean.back() > 2.0 * early;
  r.fast_cooling = r.fast_cooling_last_decade > fast_threshold;
  return r;
}

RecurrenceBreaker build_recurrence_breaker(const AlphaLaw& alpha, const MeanOracle& mean_oracle,
                                           const std::vector<std::int64_t>& n_grid,
                                           const BreakerOptions& options) {
  if (classify(alpha) != Regime::recurrent)
    throw DomainError("recurrence breaker needs a recurrent alpha");
  if (options.max_blocks == 0) throw DomainError("recurrence breaker needs max_blocks >= 1");

  std::vector<std::int64_t> grid(n_grid);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  RecurrenceBreaker out{CoolingMap::explicit_increments({1}), {}, {}};
  // Annealed means vanish identically for symmetric laws; nothing to estimate.
  if (!alpha.symmetric()) {
    for (std::int64_t n : grid) {
      if (out.blocks.size() == options.max_blocks) break;
      if (n < 1) continue;
      const MeanEstimate m = mean_oracle(n);
      if (m.estimate > 0.0 && m.estimate > options.margin * m.standard_error)
        out.blocks.push_back({n, 0, m});
      else
        out.rejected_lengths.push_back(n);
    }
  }
  if (out.blocks.empty())
    throw NotFoundError("no grid point has an annealed mean significantly above zero");

  // Backward pass: N_last fixed, then N_j = ceil(2 (N_{j+1} + 1) n_{j+1} / E_j).
  const double cap = static_cast<double>(options.max_total_time);
  out.blocks.back().count = std::max<std::int64_t>(1, options.last_count);
  for (std::size_t j = out.blocks.size() - 1; j-- > 0;) {
    const BreakerBlock& next = out.blocks[j + 1];
    const double need = 2.0 * (static_cast<double>(next.count) + 1.0) *
                        static_cast<double>(next.length) / out.blocks[j].mean.estimate;
    if (!(need < cap)) throw InfeasibleError("growth condition needs more than max_total_time steps");
    out.blocks[j].count = static_cast<std::int64_t>(std::ceil(need));
  }
  double total = 0.0;
  std::vector<Block> blocks;
  for (const BreakerBlock& b : out.blocks) {
    total += static_cast<double>(b.count) * static_cast<double>(b.length);
    blocks.push_back({b.length, b.count});
  }
  if (total > cap) throw InfeasibleError("block schedule exceeds max_total_time");
  out.map = CoolingMap::repeated_blocks(std::move(blocks));
  return out;
}

}  // namespace cw
