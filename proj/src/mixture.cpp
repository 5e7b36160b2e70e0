#include "cw/mixture.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>

#include "cw/error.hpp"
#include "cw/kesten.hpp"
#include "cw/stats.hpp"

namespace cw {

MixtureWeights::MixtureWeights(std::vector<double> entries) : entries_(std::move(entries)) {
  for (double w : entries_)
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("mixture weights must be finite and >= 0");
  if (norm_squared() > 1.0 + 1e-12) throw DomainError("mixture weights need ||lambda||^2 <= 1");
}

double MixtureWeights::norm_squared() const noexcept {
  double s = 0.0;
  for (double w : entries_) s += w * w;
  return s;
}

double MixtureWeights::gaussian_weight() const noexcept {
  return std::sqrt(std::max(0.0, 1.0 - norm_squared()));
}

double MixtureWeights::max_entry() const noexcept {
  double m = 0.0;
  for (double w : entries_) m = std::max(m, w);
  return m;
}

MixtureWeights MixtureWeights::sorted_desc() const {
  std::vector<double> v(entries_);
  std::stable_sort(v.begin(), v.end(), std::greater<>());
  return MixtureWeights(std::move(v));
}

MixtureWeights MixtureWeights::boundary_pinned() const {
  std::vector<double> v(entries_);
  if (v.size() > 1) std::stable_sort(v.begin() + 1, v.end(), std::greater<>());
  return MixtureWeights(std::move(v));
}

MixtureWeights lambda_q(double q, std::size_t truncation) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("lambda_q needs q in (0,1]");
  const double q2 = q * q;
  const double keep = 1.0 - q2;
  std::size_t J = truncation;
  if (J == 0) {
    J = 1;
    double tail = keep;
    while (tail >= 1e-12) {
      tail *= keep;
      ++J;
    }
  }
  std::vector<double> w(J + 1, 0.0);
  double power = 1.0;  // (1 - q^2)^{j-1}
  for (std::size_t j = 1; j <= J; ++j) {
    w[j] = std::sqrt(q2 * power);
    power *= keep;
  }
  return MixtureWeights(std::move(w));
}

double q_from_c(double c) {
  if (!(c > 0.0)) throw DomainError("q_from_c needs c > 0");
  return std::sqrt(-std::expm1(-4.0 * c));
}

std::vector<double> canonicalize(const MixtureWeights& lambda) {
  std::vector<double> v;
  for (double w : lambda.entries())
    if (w > 0.0) v.push_back(w);
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

bool mixtures_equal_in_law(const MixtureWeights& a, const MixtureWeights& b, double tol) {
  const std::vector<double> ca = canonicalize(a);
  const std::vector<double> cb = canonicalize(b);
  const std::size_t n = std::max(ca.size(), cb.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < ca.size() ? ca[i] : 0.0;
    const double y = i < cb.size() ? cb[i] : 0.0;
    if (std::abs(x - y) > tol) return false;
  }
  return true;
}

double DensityGrid::cdf_at(double x) const noexcept {
  const double pos = (x - x0) / dx;
  if (pos <= 0.0) return 0.0;
  const auto last = static_cast<double>(cdf.size() - 1);
  if (pos >= last) return 1.0;
  const auto i = static_cast<std::size_t>(pos);
  const double f = pos - static_cast<double>(i);
  return cdf[i] + f * (cdf[i + 1] - cdf[i]);
}

double DensityGrid::density_at(double x) const noexcept {
  const double pos = (x - x0) / dx;
  const auto last = static_cast<double>(density.size() - 1);
  if (pos < 0.0 || pos > last) return 0.0;
  const auto i = std::min(static_cast<std::size_t>(pos), density.size() - 2);
  const double f = pos - static_cast<double>(i);
  return density[i] + f * (density[i + 1] - density[i]);
}

MixtureLaw::MixtureLaw(const MixtureWeights& lambda, bool include_gaussian, const MixtureOptions& options)
    : options_(options) {
  std::vector<double> sorted = canonicalize(lambda);
  double folded = 0.0;
  if (sorted.size() > options.max_components) {
    for (std::size_t j = options.max_components; j < sorted.size(); ++j) folded += sorted[j] * sorted[j];
    if (std::sqrt(folded) >= options.fold_threshold)
      throw DomainError("mixture has more than " + std::to_string(options.max_components) +
                        " components and their l2 tail mass " + std::to_string(std::sqrt(folded)) +
                        " is too large to fold into the Gaussian part");
    sorted.resize(options.max_components);
  }
  components_ = std::move(sorted);
  double gaussian_var = folded;
  if (include_gaussian) gaussian_var += lambda.gaussian_weight() * lambda.gaussian_weight();
  gaussian_sd_ = std::sqrt(gaussian_var);
}

double MixtureLaw::variance() const noexcept {
  double v = gaussian_sd_ * gaussian_sd_;
  for (double w : components_) v += w * w;
  return v;
}

std::vector<double> MixtureLaw::sample(std::uint64_t seed, std::size_t count) const {
  const double inv_sigma = 1.0 / kesten::sigma();
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    SplitMix64 rng(derive_seed(seed, i, 0));
    double x = 0.0;
    for (double w : components_) x += w * inv_sigma * kesten::quantile(rng.open_uniform());
    if (gaussian_sd_ > 0.0) x += gaussian_sd_ * rng.normal();
    out[i] = x;
  }
  return out;
}

double MixtureLaw::charfn(double t) const {
  const double inv_sigma = 1.0 / kesten::sigma();
  double phi = std::exp(-0.5 * gaussian_sd_ * gaussian_sd_ * t * t);
  for (double w : components_) {
    if (phi == 0.0) break;
    phi *= kesten::charfn(w * inv_sigma * t).real();
  }
  return phi;
}

double MixtureLaw::mgf_radius() const noexcept {
  if (components_.empty()) return std::numeric_limits<double>::infinity();
  return kesten::kMgfRadius * kesten::sigma() / components_.front();
}

double MixtureLaw::mgf(double t) const {
  if (!(std::abs(t) < mgf_radius())) throw DomainError("mixture mgf is infinite beyond its radius");
  const double inv_sigma = 1.0 / kesten::sigma();
  double m = std::exp(0.5 * gaussian_sd_ * gaussian_sd_ * t * t);
  for (double w : components_) m *= kesten::mgf(w * inv_sigma * t);
  return m;
}

DensityGrid MixtureLaw::density_on_grid() const {
  const double sd = std::sqrt(variance());
  const double half_width = options_.half_width_sd * std::max(sd, 1e-300);
  try {
    return density_on_grid(half_width, options_.grid_points);
  } catch (const GridTooNarrowError& e) {
    // Heavy single components need a little more room than the default span.
    return density_on_grid(e.suggested_half_width() * 1.01, options_.grid_points);
  }
}

DensityGrid MixtureLaw::density_on_grid(double half_width, std::size_t points) const {
  if (points < 16 || (points & (points - 1)) != 0)
    throw DomainError("density grid needs a power-of-two point count >= 16");
  if (!(half_width > 0.0)) throw DomainError("density grid needs a positive half width");

  // Chernoff: P(|X| > L) <= 2 M(theta) e^{-theta L}, minimized over a theta grid.
  const double radius = mgf_radius();
  const double sd = std::sqrt(variance());
  double best_theta = 0.0;
  double best_log_bound = HUGE_VAL;
  const auto consider = [&](double theta) {
    const double b = std::log(2.0) + std::log(mgf(theta)) - theta * half_width;
    if (b < best_log_bound) {
      best_log_bound = b;
      best_theta = theta;
    }
  };
  if (std::isfinite(radius)) {
    for (int i = 1; i <= 49; ++i) consider(radius * i / 50.0);
  } else {
    consider(half_width / (gaussian_sd_ * gaussian_sd_));
  }
  if (best_log_bound > std::log(options_.tail_tolerance)) {
    const double needed =
        (std::log(2.0) + std::log(mgf(best_theta)) - std::log(options_.tail_tolerance)) / best_theta;
    throw GridTooNarrowError("density grid half width " + std::to_string(half_width) +
                                 " leaves too much tail mass; try " + std::to_string(needed),
                             std::max(needed, half_width + sd));
  }

  const std::size_t n = points;
  const double dx = 2.0 * half_width / static_cast<double>(n);
  const double dt = 2.0 * std::numbers::pi / (static_cast<double>(n) * dx);
  fftw_complex* buffer = fftw_alloc_complex(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = (static_cast<double>(k) - static_cast<double>(n / 2)) * dt;
    const std::complex<double> g = charfn(t) * std::polar(1.0, t * half_width);
    buffer[k][0] = g.real();
    buffer[k][1] = g.imag();
  }
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buffer, buffer, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  DensityGrid grid;
  grid.x0 = -half_width;
  grid.dx = dx;
  grid.density.resize(n);
  const double scale = dt / (2.0 * std::numbers::pi);
  for (std::size_t m = 0; m < n; ++m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    grid.density[m] = std::max(0.0, sign * scale * buffer[m][0]);
  }
  fftw_free(buffer);

  grid.cdf.assign(n, 0.0);
  for (std::size_t m = 1; m < n; ++m)
    grid.cdf[m] = grid.cdf[m - 1] + 0.5 * dx * (grid.density[m - 1] + grid.density[m]);
  const double total = grid.cdf.back();
  if (total > 0.0)
    for (double& c : grid.cdf) c /= total;
  return grid;
}

}  // namespace cw
