#pragma once

#include <cstdint>
#include <vector>

namespace cw {

/// Weight vector lambda with ||lambda||_2 <= 1, parameter of the law
///   V^{(x)lambda} + a(lambda) Phi,  V^{(x)lambda} = sum_j lambda(j) V_j / sigma_V,
/// with V_j i.i.d. Kesten variables and a(lambda) = sqrt(max(0, 1 - ||lambda||^2)).
class MixtureWeights {
 public:
  MixtureWeights() = default;
  /// Throws DomainError for negative entries or squared norm above 1 + 1e-12.
  explicit MixtureWeights(std::vector<double> entries);

  const std::vector<double>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  double operator[](std::size_t j) const noexcept { return j < entries_.size() ? entries_[j] : 0.0; }
  double norm_squared() const noexcept;
  double gaussian_weight() const noexcept;  // a(lambda)
  double max_entry() const noexcept;

  /// Entries sorted decreasingly.
  MixtureWeights sorted_desc() const;
  /// Entry 0 kept first, the rest sorted decreasingly.
  MixtureWeights boundary_pinned() const;

 private:
  std::vector<double> entries_;
};

/// lambda_q(0) = 0, lambda_q(j)^2 = q^2 (1 - q^2)^{j-1} for j = 1..J. With J = 0
/// the truncation is the smallest J whose tail mass (1 - q^2)^J is below 1e-12.
MixtureWeights lambda_q(double q, std::size_t truncation = 0);

/// q_c = sqrt((e^{4c} - 1) / e^{4c}).
double q_from_c(double c);

/// Nonzero entries sorted decreasingly; zero padding and order are dropped.
std::vector<double> canonicalize(const MixtureWeights& lambda);

/// Equal in law iff the canonical forms match entrywise within tol.
bool mixtures_equal_in_law(const MixtureWeights& a, const MixtureWeights& b, double tol = 1e-9);

struct DensityGrid {
  double x0 = 0.0;
  double dx = 0.0;
  std::vector<double> density;
  std::vector<double> cdf;  // cumulative trapezoid, renormalized to end at 1

  double x(std::size_t i) const noexcept { return x0 + dx * static_cast<double>(i); }
  /// Linear interpolation of the grid CDF, clamped to [0, 1] outside the grid.
  double cdf_at(double x) const noexcept;
  double density_at(double x) const noexcept;
};

struct MixtureOptions {
  std::size_t max_components = 64;   // J
  double fold_threshold = 1e-4;      // l2 tail mass allowed to fold into the Gaussian part
  std::size_t grid_points = 1 << 16;
  double half_width_sd = 12.0;
  double tail_tolerance = 1e-6;      // Chernoff bound on mass outside the grid
};

/// The law sum_j lambda(j) V_j / sigma_V (+ a(lambda) Phi when include_gaussian).
/// Components beyond the J largest fold into the Gaussian part when their l2
/// mass is below the fold threshold; otherwise construction throws DomainError.
class MixtureLaw {
 public:
  MixtureLaw(const MixtureWeights& lambda, bool include_gaussian, const MixtureOptions& options = {});

  const std::vector<double>& components() const noexcept { return components_; }
  double gaussian_sd() const noexcept { return gaussian_sd_; }
  double variance() const noexcept;

  /// Sample i depends only on (seed, i).
  std::vector<double> sample(std::uint64_t seed, std::size_t count) const;

  /// Density by characteristic-function product and FFT inversion on the
  /// default grid of options.grid_points points over +-half_width_sd standard
  /// deviations, widened to the Chernoff-suggested span when that is too narrow.
  DensityGrid density_on_grid() const;
  /// Same on [-half_width, half_width) with `points` points. Throws
  /// GridTooNarrowError when the Chernoff tail bound exceeds the tolerance.
  DensityGrid density_on_grid(double half_width, std::size_t points) const;

  double mgf(double t) const;
  /// pi^2 sigma_V / (8 max lambda); infinite for a pure Gaussian.
  double mgf_radius() const noexcept;
  double charfn(double t) const;

 private:
  std::vector<double> components_;  // nonzero lambda(j), decreasing
  double gaussian_sd_ = 0.0;
  MixtureOptions options_;
};

}  // namespace cw
