#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cw {

/// SplitMix64 finalizer (Stafford variant 13). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl64(std::uint64_t x, int r) noexcept {
  return (x << r) | (x >> (64 - r));
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// Seed for substream (stream, substream) of a master seed.
///
///   derive_seed(m, a, b) = mix64(m ^ rotl(mix64(a + G), 21) ^ rotl(mix64(b + 2G), 42))
///
/// with G = 0x9e3779b97f4a7c15. The differing offsets and rotations make the
/// map asymmetric in (a, b). This derivation is part of the reproducibility
/// contract: replica r, cooling interval k of a run with master seed m always
/// uses derive_seed(m, r, k). Over 2^20 derived streams the birthday bound for
/// any 64-bit collision is 2^40 / 2^64, about 6e-8.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t substream) noexcept {
  return mix64(master ^ rotl64(mix64(stream + kGoldenGamma), 21) ^
               rotl64(mix64(substream + 2 * kGoldenGamma), 42));
}

/// Maps 64 random bits to a double in [0, 1) using the top 53 bits.
constexpr double to_unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based SplitMix64 stream. Cheap to construct, so each replica owns one.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }
  constexpr double uniform() noexcept { return to_unit_interval(next()); }
  // Uniform on the open interval (0, 1); safe for log and inverse CDFs.
  constexpr double open_uniform() noexcept {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }
  /// Box-Muller; consumes two draws per call.
  double normal() noexcept;

 private:
  std::uint64_t state_;
};

/// Sorted sample with at least one element.
class EmpiricalSample {
 public:
  explicit EmpiricalSample(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double cdf(double x) const noexcept;

 private:
  std::vector<double> values_;
};

/// One-sample Kolmogorov-Smirnov distance sup_x |F_n(x) - F(x)|.
double ks_distance(const EmpiricalSample& sample, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov distance.
double ks_distance(const EmpiricalSample& a, const EmpiricalSample& b);

/// Asymptotic 5% critical value 1.36/sqrt(n), multiplied by `slack`.
double ks_critical_value(std::size_t n, double slack = 1.0);

/// Two-sample version: 1.36 * sqrt((n + m) / (n m)) * slack.
double ks_critical_value(std::size_t n, std::size_t m, double slack = 1.0);

struct MomentsReport {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skew = 0.0;
  double mean_se = 0.0;
  double variance_se = 0.0;
  double skew_se = 0.0;
  bool degenerate = false;  // variance exactly zero
};

/// Sample moments with standard errors. With `batches > 1` the mean SE is the
/// batch-means estimate, which stays honest for correlated streams.
MomentsReport moments_with_se(std::span<const double> sample, std::size_t batches = 0);

/// Mergeable accumulator for parallel reductions. Merge per-task accumulators
/// in task-index order so the result does not depend on the worker count.
class MomentAccumulator {
 public:
  void add(double x) noexcept;
  void merge(const MomentAccumulator& other) noexcept;

  std::size_t count() const noexcept { return count_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }
  double min() const noexcept { return min_; }
  double max() const noexcept { return max_; }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double min_ = HUGE_VAL;
  double max_ = -HUGE_VAL;
};

double normal_cdf(double x) noexcept;

struct TrendTest {
  double statistic = 0.0;  // Mann-Kendall S
  double z = 0.0;
  double p_increasing = 1.0;  // one-sided p-value against an upward trend
  double p_decreasing = 1.0;
  double p_two_sided = 1.0;
};

/// Mann-Kendall trend test with the tie-corrected variance.
TrendTest mann_kendall(std::span<const double> series);

/// Pearson correlation; NaN when either side is constant.
double correlation(std::span<const double> x, std::span<const double> y);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace cw
