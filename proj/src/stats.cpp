#include "cw/stats.hpp"

#include <algorithm>
#include <map>
#include <numbers>

#include "cw/error.hpp"

namespace cw {

double SplitMix64::normal() noexcept {
  const double u1 = open_uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

EmpiricalSample::EmpiricalSample(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DomainError("empirical sample needs at least one value");
  std::sort(values_.begin(), values_.end());
}

double EmpiricalSample::cdf(double x) const noexcept {
  const auto it = std::upper_bound(values_.begin(), values_.end(), x);
  return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
}

double ks_distance(const EmpiricalSample& sample, const std::function<double(double)>& cdf) {
  const auto values = sample.values();
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    d = std::max({d, std::abs(static_cast<double>(i + 1) / n - f),
                  std::abs(static_cast<double>(i) / n - f)});
  }
  return d;
}

double ks_distance(const EmpiricalSample& a, const EmpiricalSample& b) {
  const auto x = a.values();
  const auto y = b.values();
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

double ks_critical_value(std::size_t n, double slack) {
  return 1.36 / std::sqrt(static_cast<double>(n)) * slack;
}

double ks_critical_value(std::size_t n, std::size_t m, double slack) {
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return 1.36 * std::sqrt((dn + dm) / (dn * dm)) * slack;
}

MomentsReport moments_with_se(std::span<const double> sample, std::size_t batches) {
  if (sample.size() < 2) throw DomainError("moments need at least two values");
  MomentsReport r;
  r.count = sample.size();
  const double n = static_cast<double>(r.count);
  double sum = 0.0;
  for (double x : sample) sum += x;
  r.mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : sample) {
    const double d = x - r.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  r.variance = m2 * n / (n - 1.0);
  r.degenerate = (m2 == 0.0);
  r.mean_se = std::sqrt(r.variance / n);
  r.variance_se = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
  r.skew = r.degenerate ? 0.0 : m3 / std::pow(m2, 1.5);
  if (n > 3.0) r.skew_se = std::sqrt(6.0 * n * (n - 1.0) / ((n - 2.0) * (n + 1.0) * (n + 3.0)));

  if (batches > 1 && sample.size() >= 2 * batches) {
    const std::size_t per = sample.size() / batches;
    std::vector<double> means(batches, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
      for (std::size_t i = b * per; i < (b + 1) * per; ++i) means[b] += sample[i];
      means[b] /= static_cast<double>(per);
    }
    double bm = 0.0;
    for (double m : means) bm += m;
    bm /= static_cast<double>(batches);
    double bv = 0.0;
    for (double m : means) bv += (m - bm) * (m - bm);
    bv /= static_cast<double>(batches - 1);
    r.mean_se = std::sqrt(bv / static_cast<double>(batches));
  }
  return r;
}

void MomentAccumulator::add(double x) noexcept {
  ++count_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(count_);
  m2_ += d * (x - mean_);
  min_ = std::min(min_, x);
  max_ = std::max(max_, x);
}

void MomentAccumulator::merge(const MomentAccumulator& other) noexcept {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double d = other.mean_ - mean_;
  const double n = na + nb;
  mean_ += d * nb / n;
  m2_ += other.m2_ + d * d * na * nb / n;
  count_ += other.count_;
  min_ = std::min(min_, other.min_);
  max_ = std::max(max_, other.max_);
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

TrendTest mann_kendall(std::span<const double> series) {
  TrendTest t;
  const std::size_t n = series.size();
  if (n < 3) return t;
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (series[j] > series[i]) s += 1.0;
      else if (series[j] < series[i]) s -= 1.0;
    }
  std::map<double, int> ties;
  for (double v : series) ++ties[v];
  const double dn = static_cast<double>(n);
  double var = dn * (dn - 1.0) * (2.0 * dn + 5.0);
  for (const auto& [value, count] : ties) {
    if (count > 1) {
      const double c = count;
      var -= c * (c - 1.0) * (2.0 * c + 5.0);
    }
  }
  var /= 18.0;
  t.statistic = s;
  if (var <= 0.0) return t;
  const double sd = std::sqrt(var);
  t.z = s > 0.0 ? (s - 1.0) / sd : (s < 0.0 ? (s + 1.0) / sd : 0.0);
  t.p_increasing = 1.0 - normal_cdf(t.z);
  t.p_decreasing = normal_cdf(t.z);
  t.p_two_sided = 2.0 * std::min(t.p_increasing, t.p_decreasing);
  return t;
}

double correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("correlation needs two equal-length series");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nan("");
  return sxy / std::sqrt(sxx * syy);
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit needs two equal-length series");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  if (sxx == 0.0) throw DomainError("fit needs non-constant abscissae");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

}  // namespace cw
