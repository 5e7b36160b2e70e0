#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace cw {

/// Sinai-Kesten law V with density
///   v(x) = (2/pi) sum_{k>=0} (-1)^k/(2k+1) exp(-a_k |x|),  a_k = (2k+1)^2 pi^2 / 8.
namespace kesten {

inline constexpr double kTolerance = 1e-12;
/// The mgf of V is finite exactly for |t| < pi^2 / 8.
inline constexpr double kMgfRadius = 1.2337005501361697;  // pi^2 / 8

double density(double x);
double cdf(double x);
/// Inverse CDF; u must lie in (0, 1).
double quantile(double u);
/// Var V = (4096/pi^7) sum_k (-1)^k/(2k+1)^7, computed once.
double variance();
double sigma();
/// E[e^{tV}] for |t| < pi^2/8, term-wise sum of 2 a_k / (a_k^2 - t^2).
double mgf(double t);
/// E[e^{itV}] = (sec z - sech z) / z^2 with z = sqrt(2 i t); real because V is symmetric.
std::complex<double> charfn(double t);

/// Inverse-CDF samples; sample i depends only on (seed, i).
std::vector<double> sample(std::uint64_t seed, std::size_t count);

}  // namespace kesten

/// Cohen-Rodriguez Villegas-Zagier acceleration of sum_{k>=0} (-1)^k a_k
/// using the first n terms.
double alternating_sum_cvz(const auto& term, int n) {
  double d = 1.0;
  const double base = 3.0 + 2.8284271247461903;
  for (int i = 0; i < n; ++i) d *= base;
  d = 0.5 * (d + 1.0 / d);
  double b = -1.0;
  double c = -d;
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    c = b - c;
    s += c * term(k);
    const double kk = k;
    b = (kk + n) * (kk - n) * b / ((kk + 0.5) * (kk + 1.0));
  }
  return s / d;
}

}  // namespace cw
