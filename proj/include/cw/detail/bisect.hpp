#pragma once

#include <cmath>
#include <string>

#include "cw/error.hpp"

namespace cw {

/// Bisection on f over [lo, hi], doubling the bracket while the signs agree.
/// 200-iteration cap; throws ConvergenceError instead of returning an
/// unconverged value.
double bisect(const auto& f, double lo, double hi, double tolerance) {
  constexpr int kMaxIterations = 200;
  double flo = f(lo);
  double fhi = f(hi);
  int expansions = 0;
  while ((flo < 0.0) == (fhi < 0.0) && flo != 0.0 && fhi != 0.0) {
    if (++expansions > 60) throw ConvergenceError("bisection could not bracket a root");
    const double width = hi - lo;
    hi = lo + 2.0 * width;
    fhi = f(hi);
  }
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  for (int i = 0; i < kMaxIterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= tolerance || mid == lo || mid == hi) return mid;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  throw ConvergenceError("bisection did not converge in " + std::to_string(kMaxIterations) +
                         " iterations");
}

}  // namespace cw
