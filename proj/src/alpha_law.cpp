#include "cw/alpha_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cw/error.hpp"

namespace cw {

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::recurrent: return "recurrent";
    case Regime::right_transient: return "right_transient";
    case Regime::left_transient: return "left_transient";
  }
  return "unknown";
}

AlphaLaw::AlphaLaw(std::vector<Atom> atoms) {
  if (atoms.empty()) throw DomainError("alpha law needs at least one atom");
  double total = 0.0;
  for (const Atom& a : atoms) {
    if (!(a.omega > 0.0 && a.omega < 1.0))
      throw DomainError("alpha atom outside (0,1): " + std::to_string(a.omega));
    if (!(a.weight > 0.0)) throw DomainError("alpha weights must be strictly positive");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw DomainError("alpha weights sum to " + std::to_string(total) + ", expected 1");

  for (const Atom& a : atoms) {
    auto it = std::find_if(atoms_.begin(), atoms_.end(),
                           [&](const Atom& b) { return b.omega == a.omega; });
    if (it != atoms_.end()) it->weight += a.weight;
    else atoms_.push_back(a);
  }
  double lo = 1.0, hi = 0.0;
  for (const Atom& a : atoms_) {
    lo = std::min(lo, a.omega);
    hi = std::max(hi, a.omega);
  }
  ellipticity_ = std::min(lo, 1.0 - hi);
}

AlphaLaw AlphaLaw::recurrent_family(double x) {
  const double eta = solve_eta_recurrent(x);
  if (eta == x) return AlphaLaw({{x, 1.0}});
  return AlphaLaw({{x, x}, {eta, 1.0 - x}});
}

AlphaLaw AlphaLaw::s_transient_family(double x, double s) {
  const double eta = solve_eta_s_transient(x, s);
  if (eta == x) return AlphaLaw({{x, 1.0}});
  return AlphaLaw({{x, x}, {eta, 1.0 - x}});
}

AlphaLaw AlphaLaw::reflected() const {
  std::vector<Atom> flipped;
  flipped.reserve(atoms_.size());
  for (const Atom& a : atoms_) flipped.push_back({1.0 - a.omega, a.weight});
  return AlphaLaw(std::move(flipped));
}

bool AlphaLaw::symmetric() const noexcept {
  for (const Atom& a : atoms_) {
    const auto it = std::find_if(atoms_.begin(), atoms_.end(), [&](const Atom& b) {
      return std::abs(b.omega - (1.0 - a.omega)) <= 1e-12 && std::abs(b.weight - a.weight) <= 1e-12;
    });
    if (it == atoms_.end()) return false;
  }
  return true;
}

double AlphaLaw::mean_omega() const noexcept {
  double m = 0.0;
  for (const Atom& a : atoms_) m += a.weight * a.omega;
  return m;
}

double AlphaLaw::mean_inverse_omega() const noexcept {
  double m = 0.0;
  for (const Atom& a : atoms_) m += a.weight / a.omega;
  return m;
}

std::string AlphaLaw::to_string() const {
  std::ostringstream out;
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "atoms=[";
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (i) out << ',';
    out << '(' << atoms_[i].omega << ',' << atoms_[i].weight << ')';
  }
  out << ']';
  return out.str();
}

double rho(double omega) noexcept { return (1.0 - omega) / omega; }

double rho_moment(const AlphaLaw& alpha, double s) {
  if (!std::isfinite(s)) throw DomainError("rho_moment needs a finite exponent");
  double m = 0.0;
  for (const Atom& a : alpha.atoms()) m += a.weight * std::pow(rho(a.omega), s);
  return m;
}

double log_rho_mean(const AlphaLaw& alpha) noexcept {
  double m = 0.0;
  for (const Atom& a : alpha.atoms()) m += a.weight * std::log(rho(a.omega));
  return m;
}

double log_rho_second_moment(const AlphaLaw& alpha) noexcept {
  double m = 0.0;
  for (const Atom& a : alpha.atoms()) {
    const double l = std::log(rho(a.omega));
    m += a.weight * l * l;
  }
  return m;
}

Regime classify(const AlphaLaw& alpha) noexcept {
  const double m = log_rho_mean(alpha);
  if (std::abs(m) <= kRecurrenceTolerance) return Regime::recurrent;
  return m < 0.0 ? Regime::right_transient : Regime::left_transient;
}

SpeedReport speed(const AlphaLaw& alpha) {
  SpeedReport r;
  r.regime = classify(alpha);
  if (r.regime == Regime::recurrent) return r;
  const AlphaLaw right = r.regime == Regime::right_transient ? alpha : alpha.reflected();
  const double m = rho_moment(right, 1.0);
  if (m >= 1.0) {
    r.zero_speed_transient = true;
    return r;
  }
  const double v = (1.0 - m) / (1.0 + m);
  r.speed = r.regime == Regime::right_transient ? v : -v;
  return r;
}

// Both eta solvers invert the strictly monotone map eta -> (1-eta)/eta in
// closed form; the residual is checked so an unrepresentable eta is reported
// as a failure instead of a wrong value.
double solve_eta_recurrent(double x) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("solve_eta_recurrent needs x in (0,1)");
  const double log_ratio = -x * std::log(rho(x)) / (1.0 - x);
  const double eta = 1.0 / (1.0 + std::exp(log_ratio));
  if (!(eta > 0.0 && eta < 1.0))
    throw NoRootError("no representable eta in (0,1) for x = " + std::to_string(x));
  return eta;
}

double solve_eta_s_transient(double x, double s) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("solve_eta_s_transient needs x in (0,1)");
  if (!(s > 0.0)) throw DomainError("solve_eta_s_transient needs s > 0");
  const double head = x * std::pow(rho(x), s);
  if (head >= 1.0)
    throw NoRootError("x ((1-x)/x)^s >= 1, no eta solves the moment equation");
  const double ratio = std::pow((1.0 - head) / (1.0 - x), 1.0 / s);
  const double eta = 1.0 / (1.0 + ratio);
  if (!(eta > 0.0 && eta < 1.0))
    throw NoRootError("no representable eta in (0,1) for x = " + std::to_string(x));
  return eta;
}

std::optional<double> transience_index(const AlphaLaw& alpha) {
  if (classify(alpha) != Regime::right_transient) return std::nullopt;
  double max_rho = 0.0;
  for (const Atom& a : alpha.atoms()) max_rho = std::max(max_rho, rho(a.omega));
  if (max_rho <= 1.0) return std::numeric_limits<double>::infinity();

  // s -> <rho^s> is convex, equals 1 at s = 0 and dips below 1 just after it.
  // Work with the negative side at an interior point of the dip.
  const auto excess = [&](double s) { return rho_moment(alpha, s) - 1.0; };
  double lo = 1e-6;
  while (excess(lo) >= 0.0) {
    lo *= 0.5;
    if (lo < 1e-300) throw ConvergenceError("transience index: no interior negative point");
  }
  double hi = 2.0 * lo;
  while (excess(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw ConvergenceError("transience index: bracket expansion failed");
  }
  return bisect(excess, lo, hi, 1e-12 * std::max(1.0, hi));
}

MomentReport moment_report(const AlphaLaw& alpha) {
  MomentReport r;
  r.log_rho_mean = log_rho_mean(alpha);
  r.sigma0_sq = log_rho_second_moment(alpha);
  r.rho_mean = rho_moment(alpha, 1.0);
  r.regime = classify(alpha);
  r.speed = speed(alpha).speed;
  r.s_index = transience_index(alpha);
  return r;
}

}  // namespace cw
