#include "cw/environment.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

#include "cw/error.hpp"
#include "cw/stats.hpp"

namespace cw {

SiteField::SiteField(AlphaLaw alpha, std::uint64_t seed) : alpha_(std::move(alpha)), seed_(seed) {
  double total = 0.0;
  for (const Atom& a : alpha_.atoms()) {
    total += a.weight;
    cumulative_.push_back(total);
  }
}

std::size_t site_atom_index(std::uint64_t seed, std::int64_t x,
                            const std::vector<double>& cumulative) noexcept {
  const std::uint64_t key = mix64(static_cast<std::uint64_t>(x) + kGoldenGamma);
  const double u = to_unit_interval(mix64(seed ^ key));
  const std::size_t last = cumulative.size() - 1;
  for (std::size_t i = 0; i < last; ++i)
    if (u < cumulative[i]) return i;
  return last;
}

std::size_t SiteField::atom_index(std::int64_t x) const noexcept {
  return site_atom_index(seed_, x, cumulative_);
}

EnvironmentWindow::EnvironmentWindow(const AlphaLaw& alpha, std::uint64_t seed, std::int64_t lo,
                                     std::int64_t hi)
    : field_(SiteField(alpha, seed)), lo_(lo) {
  if (lo > 0 || hi < 0) throw DomainError("environment window must satisfy lo <= 0 <= hi");
  omega_.resize(static_cast<std::size_t>(hi - lo + 1));
  for (std::int64_t x = lo; x <= hi; ++x) omega_[static_cast<std::size_t>(x - lo)] = field_->omega(x);
}

EnvironmentWindow::EnvironmentWindow(std::int64_t lo, std::vector<double> omegas)
    : lo_(lo), omega_(std::move(omegas)) {
  if (omega_.empty()) throw DomainError("explicit environment needs at least one site");
  for (double w : omega_)
    if (!(w > 0.0 && w < 1.0)) throw DomainError("environment values must lie in (0,1)");
}

double EnvironmentWindow::omega(std::int64_t x) const {
  if (x < lo() || x > hi())
    throw DomainError("site " + std::to_string(x) + " outside environment window [" +
                      std::to_string(lo()) + "," + std::to_string(hi()) + "]");
  return omega_[static_cast<std::size_t>(x - lo_)];
}

void EnvironmentWindow::extend(std::int64_t a, std::int64_t b) {
  if (covers(a, b)) return;
  if (!field_) throw DomainError("explicit environment windows cannot be extended");
  const std::int64_t new_lo = std::min(a, lo());
  const std::int64_t new_hi = std::max(b, hi());
  std::vector<double> grown(static_cast<std::size_t>(new_hi - new_lo + 1));
  for (std::int64_t x = new_lo; x <= new_hi; ++x) {
    const auto i = static_cast<std::size_t>(x - new_lo);
    grown[i] = (x >= lo() && x <= hi()) ? omega_[static_cast<std::size_t>(x - lo_)] : field_->omega(x);
  }
  omega_ = std::move(grown);
  lo_ = new_lo;
}

void EnvironmentWindow::dump_csv(std::ostream& out) const {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "x,omega\n";
  for (std::size_t i = 0; i < omega_.size(); ++i)
    out << lo_ + static_cast<std::int64_t>(i) << ',' << omega_[i] << '\n';
  out.precision(old_precision);
}

EnvironmentWindow sample_window(const AlphaLaw& alpha, std::uint64_t seed, std::int64_t lo,
                                std::int64_t hi) {
  return EnvironmentWindow(alpha, seed, lo, hi);
}

PotentialPath::PotentialPath(const EnvironmentWindow& env) : lo_(env.lo()) {
  const std::int64_t hi = env.hi();
  u_.assign(static_cast<std::size_t>(hi - lo_ + 1), 0.0);
  const auto at = [&](std::int64_t k) -> double& { return u_[static_cast<std::size_t>(k - lo_)]; };
  for (std::int64_t k = 1; k <= hi; ++k) at(k) = at(k - 1) + std::log(rho(env.omega(k)));
  for (std::int64_t k = -1; k >= lo_; --k) at(k) = at(k + 1) - std::log(rho(env.omega(k + 1)));
}

PotentialPath::PotentialPath(std::int64_t lo, std::vector<double> values)
    : lo_(lo), u_(std::move(values)) {
  if (lo > 0 || hi() < 0) throw DomainError("potential path must cover the origin");
}

PotentialPath potential(const EnvironmentWindow& env) { return PotentialPath(env); }

std::optional<Valley> smallest_valley(const PotentialPath& path, double depth_threshold,
                                      double delta) {
  const std::vector<double>& u = path.values();
  const std::size_t m = u.size();
  const auto origin = static_cast<std::size_t>(-path.lo());
  const double need = depth_threshold + delta;

  // reach_right[i]: last j with u[i] >= max u[i..j]; reach_left[i]: first j with u[i] >= max u[j..i].
  std::vector<std::size_t> reach_right(m), reach_left(m);
  std::vector<std::size_t> stack;
  for (std::size_t i = m; i-- > 0;) {
    while (!stack.empty() && u[stack.back()] <= u[i]) stack.pop_back();
    reach_right[i] = stack.empty() ? m - 1 : stack.back() - 1;
    stack.push_back(i);
  }
  stack.clear();
  for (std::size_t i = 0; i < m; ++i) {
    while (!stack.empty() && u[stack.back()] <= u[i]) stack.pop_back();
    reach_left[i] = stack.empty() ? 0 : stack.back() + 1;
    stack.push_back(i);
  }

  std::optional<Valley> best;
  std::size_t best_width = m;
  double min_left = HUGE_VAL;
  std::size_t argmin_left = origin;
  for (std::size_t ia = origin + 1; ia-- > 0;) {
    if (u[ia] <= min_left) {
      min_left = u[ia];
      argmin_left = ia;
    }
    if (origin - ia > best_width) break;
    double min_val = min_left;
    std::size_t argmin = argmin_left;
    for (std::size_t ic = origin; ic < m; ++ic) {
      if (ic > origin && u[ic] < min_val) {
        min_val = u[ic];
        argmin = ic;
      }
      const std::size_t width = ic - ia;
      if (width > best_width) break;
      // The bottom only moves right as c grows; once past a's reach it stays there.
      if (argmin > reach_right[ia]) break;
      if (argmin < reach_left[ic]) continue;
      const double depth = std::min(u[ia], u[ic]) - min_val;
      if (!(depth > need)) continue;
      const auto c = static_cast<std::int64_t>(ic) + path.lo();
      if (width < best_width || (best && c < best->c)) {
        best_width = width;
        best = Valley{static_cast<std::int64_t>(ia) + path.lo(), static_cast<std::int64_t>(argmin) + path.lo(),
                      c, depth};
      }
      break;  // wider c for this a cannot win
    }
  }
  return best;
}

double sigma_series_annealed(const AlphaLaw& alpha) {
  const double m = rho_moment(alpha, 1.0);
  if (m >= 1.0) throw DivergentSeriesError("annealed Sigma series diverges: <rho> >= 1");
  return alpha.mean_inverse_omega() / (1.0 - m);
}

SigmaSeriesResult sigma_series_quenched(const SiteField& field, double tolerance,
                                        std::int64_t max_terms) {
  constexpr int kWindow = 50;
  SigmaSeriesResult r;
  double product = 1.0;
  double sum = 0.0;
  std::vector<double> recent_log_rho(kWindow, 0.0);
  double window_log_sum = 0.0;
  for (std::int64_t t = 0; t < max_terms; ++t) {
    const std::int64_t i = -t;
    if (t > 0) {
      const double lr = std::log(rho(field.omega(i + 1)));
      product *= std::exp(lr);
      const auto slot = static_cast<std::size_t>(t % kWindow);
      window_log_sum += lr - recent_log_rho[slot];
      recent_log_rho[slot] = lr;
    }
    const double term = product / field.omega(i);
    sum += term;
    if (!std::isfinite(sum)) throw DivergentSeriesError("quenched Sigma series overflowed");
    r.terms = t + 1;
    if (t >= kWindow) {
      const double ratio = std::exp(window_log_sum / kWindow);
      if (ratio < 1.0) {
        const double tail = term * ratio / (1.0 - ratio);
        if (tail < tolerance * sum) {
          r.value = sum;
          r.tail_bound = tail;
          return r;
        }
      }
    }
  }
  throw DivergentSeriesError("quenched Sigma series: partial products did not decay within " +
                             std::to_string(max_terms) + " terms");
}

}  // namespace cw
