#include "cw/kesten.hpp"

#include <cmath>
#include <numbers>

#include "cw/error.hpp"
#include "cw/stats.hpp"

namespace cw::kesten {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSmallX = 0.05;
constexpr int kCvzTerms = 40;

double rate(int k) {
  const double m = 2.0 * k + 1.0;
  return m * m * kMgfRadius;
}

// Stops once the next term, which bounds the remainder, is negligible next to the leading term.
double alternating_sum_direct(const auto& term) {
  const double lead = term(0);
  double s = lead;
  for (int k = 1;; ++k) {
    const double t = term(k);
    if (t <= 1e-17 * lead) break;
    s += (k % 2 == 0) ? t : -t;
  }
  return s;
}

// sum_k (-1)^k e^{-a_k x} / (2k+1)
double density_series(double x) {
  const auto term = [x](int k) { return std::exp(-rate(k) * x) / (2.0 * k + 1.0); };
  if (x < kSmallX) return alternating_sum_cvz(term, kCvzTerms);
  return alternating_sum_direct(term);
}

// sum_k (-1)^k e^{-a_k x} / ((2k+1) a_k), equal to pi/4 at x = 0
double tail_series(double x) {
  const auto term = [x](int k) { return std::exp(-rate(k) * x) / ((2.0 * k + 1.0) * rate(k)); };
  if (x < kSmallX) return alternating_sum_cvz(term, kCvzTerms);
  return alternating_sum_direct(term);
}

// P(V > x) for x >= 0
double survival(double x) { return (2.0 / kPi) * tail_series(x); }

}  // namespace

double density(double x) { return (2.0 / kPi) * density_series(std::abs(x)); }

double cdf(double x) {
  if (x >= 0.0) return 1.0 - survival(x);
  return survival(-x);
}

double quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("kesten quantile needs u in (0,1)");
  if (u == 0.5) return 0.0;
  if (u < 0.5) return -quantile(1.0 - u);
  const double p = 1.0 - u;  // target survival
  double lo = 0.0;
  double hi = 1.0;
  while (survival(hi) > p) {
    lo = hi;
    hi *= 2.0;
  }
  // Leading-term guess, then Newton safeguarded by the bracket.
  double x = std::log((16.0 / (kPi * kPi * kPi)) / p) / kMgfRadius;
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double g = survival(x) - p;
    if (g > 0.0) lo = x;
    else hi = x;
    double next = x + g / density(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= kTolerance * std::max(1.0, x) || hi - lo <= kTolerance) return next;
    x = next;
  }
  throw ConvergenceError("kesten quantile did not converge");
}

double variance() {
  static const double value = [] {
    double s = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const double m = 2.0 * k + 1.0;
      const double t = 1.0 / std::pow(m, 7);
      s += (k % 2 == 0) ? t : -t;
      if (t < 1e-20) break;
    }
    return 4096.0 / std::pow(kPi, 7) * s;
  }();
  return value;
}

double sigma() {
  static const double value = std::sqrt(variance());
  return value;
}

double mgf(double t) {
  if (!(std::abs(t) < kMgfRadius))
    throw DomainError("kesten mgf is infinite for |t| >= pi^2/8");
  const double t2 = t * t;
  const auto term = [t2](int k) {
    const double a = rate(k);
    return 2.0 * a / ((2.0 * k + 1.0) * (a * a - t2));
  };
  // The first terms carry the pole; sum them directly and accelerate the rest.
  constexpr int kHead = 8;
  double head = 0.0;
  for (int k = 0; k < kHead; ++k) head += (k % 2 == 0) ? term(k) : -term(k);
  const double tail = alternating_sum_cvz([&](int j) { return term(j + kHead); }, kCvzTerms);
  return (2.0 / kPi) * (head + tail);
}

std::complex<double> charfn(double t) {
  const double a = std::abs(t);
  if (a < 0.01) {
    // Taylor series of (sec z - sech z) / z^2 in t; coefficients are Euler numbers.
    constexpr double c1 = 61.0 / 90.0;
    constexpr double c2 = 50521.0 * 32.0 / 3628800.0;
    constexpr double c3 = 199360981.0 * 128.0 / 87178291200.0;
    const double t2 = a * a;
    return {1.0 - t2 * (c1 - t2 * (c2 - t2 * c3)), 0.0};
  }
  const double s = std::sqrt(a);  // z = s (1 + i)
  if (s > 700.0) return {0.0, 0.0};
  const std::complex<double> z(s, s);
  const std::complex<double> cos_z(std::cos(s) * std::cosh(s), -std::sin(s) * std::sinh(s));
  const std::complex<double> cosh_z(std::cosh(s) * std::cos(s), std::sinh(s) * std::sin(s));
  const std::complex<double> value = (1.0 / cos_z - 1.0 / cosh_z) / (z * z);
  return {value.real(), 0.0};
}

std::vector<double> sample(std::uint64_t seed, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    SplitMix64 rng(derive_seed(seed, i, 0));
    out[i] = quantile(rng.open_uniform());
  }
  return out;
}

}  // namespace cw::kesten
