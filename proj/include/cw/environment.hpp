#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "cw/alpha_law.hpp"

namespace cw {

/// Atom index of site x for the field with the given seed and cumulative weights.
std::size_t site_atom_index(std::uint64_t seed, std::int64_t x,
                            const std::vector<double>& cumulative) noexcept;

/// Site-keyed i.i.d. field: omega(x) is a pure function of (seed, x), so any
/// window drawn from the same seed agrees on the sites it shares.
///
///   u(x) = top 53 bits of mix64(seed ^ mix64(x + G)) in [0, 1)
///   omega(x) = first atom whose cumulative weight exceeds u(x)
class SiteField {
 public:
  SiteField(AlphaLaw alpha, std::uint64_t seed);

  const AlphaLaw& alpha() const noexcept { return alpha_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::size_t atom_index(std::int64_t x) const noexcept;
  const std::vector<double>& cumulative() const noexcept { return cumulative_; }
  double omega(std::int64_t x) const noexcept { return alpha_.atoms()[atom_index(x)].omega; }

 private:
  AlphaLaw alpha_;
  std::uint64_t seed_;
  std::vector<double> cumulative_;
};

/// Materialized omega(x) for x in [lo, hi], lo <= 0 <= hi.
class EnvironmentWindow {
 public:
  EnvironmentWindow(const AlphaLaw& alpha, std::uint64_t seed, std::int64_t lo, std::int64_t hi);
  /// Explicit values for x = lo, lo+1, ...; used for hand-built test environments.
  EnvironmentWindow(std::int64_t lo, std::vector<double> omegas);

  std::int64_t lo() const noexcept { return lo_; }
  std::int64_t hi() const noexcept { return lo_ + static_cast<std::int64_t>(omega_.size()) - 1; }
  bool covers(std::int64_t a, std::int64_t b) const noexcept { return a >= lo() && b <= hi(); }

  /// omega(x); x must lie in the window.
  double omega(std::int64_t x) const;
  const std::vector<double>& values() const noexcept { return omega_; }

  /// Grows the window to include [a, b]. Materialized values never change.
  /// Explicit windows cannot grow and throw DomainError.
  void extend(std::int64_t a, std::int64_t b);

  /// CSV `x,omega` with a header line and round-trip precision.
  void dump_csv(std::ostream& out) const;

 private:
  std::optional<SiteField> field_;
  std::int64_t lo_ = 0;
  std::vector<double> omega_;
};

EnvironmentWindow sample_window(const AlphaLaw& alpha, std::uint64_t seed, std::int64_t lo,
                                std::int64_t hi);

/// U(k) on the window: U(0) = 0, U(k) = sum_{i=1}^k log rho(i) for k > 0 and
/// U(k) = -sum_{i=k+1}^0 log rho(i) for k < 0.
class PotentialPath {
 public:
  explicit PotentialPath(const EnvironmentWindow& env);
  PotentialPath(std::int64_t lo, std::vector<double> values);

  std::int64_t lo() const noexcept { return lo_; }
  std::int64_t hi() const noexcept { return lo_ + static_cast<std::int64_t>(u_.size()) - 1; }
  double operator()(std::int64_t k) const { return u_.at(static_cast<std::size_t>(k - lo_)); }
  const std::vector<double>& values() const noexcept { return u_; }

 private:
  std::int64_t lo_;
  std::vector<double> u_;
};

PotentialPath potential(const EnvironmentWindow& env);

struct Valley {
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::int64_t c = 0;
  double depth = 0.0;
};

/// Smallest valley around the origin with depth > threshold + delta.
///
/// Candidates are triples a <= 0 <= c with b the leftmost argmin of U on
/// [a, c], U(a) = max U on [a, b] and U(c) = max U on [b, c]; depth is
/// min(U(a), U(c)) - U(b). The winner minimizes c - a, ties going to the
/// smaller c. Returns nullopt when the path is exhausted without a winner;
/// the caller should widen the window and retry.
std::optional<Valley> smallest_valley(const PotentialPath& path, double depth_threshold,
                                      double delta = 0.0);

/// <1/omega> / (1 - <rho>), the annealed mean of the series below.
/// Throws DivergentSeriesError when <rho> >= 1.
double sigma_series_annealed(const AlphaLaw& alpha);

struct SigmaSeriesResult {
  double value = 0.0;
  std::int64_t terms = 0;
  double tail_bound = 0.0;  // geometric extrapolation of the dropped tail
};

/// Sigma(omega) = sum_{i <= 0} (1/omega(i)) prod_{j=i+1}^0 rho(j) on a quenched field.
/// Stops once the geometric tail implied by the product of rho over the last
/// 50 sites falls below tolerance times the partial sum. Throws
/// DivergentSeriesError when that has not happened after `max_terms` terms.
SigmaSeriesResult sigma_series_quenched(const SiteField& field, double tolerance = 1e-12,
                                        std::int64_t max_terms = 100000);

}  // namespace cw
