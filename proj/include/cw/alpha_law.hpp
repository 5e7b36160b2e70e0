#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cw/detail/bisect.hpp"

namespace cw {

/// One support point of an environment marginal: P(omega(0) = omega) = weight.
struct Atom {
  double omega;
  double weight;
};

enum class Regime { recurrent, right_transient, left_transient };

std::string_view to_string(Regime regime) noexcept;

/// Threshold on |<log rho>| below which a law counts as recurrent.
inline constexpr double kRecurrenceTolerance = 1e-12;

/// Finite discrete law of omega(0) on (0, 1). Immutable after construction.
class AlphaLaw {
 public:
  /// Validates: weights > 0 summing to 1 within 1e-12, atoms strictly inside (0, 1).
  /// Atoms are kept in the given order; equal omegas are merged.
  explicit AlphaLaw(std::vector<Atom> atoms);

  /// Two-point family x delta_x + (1 - x) delta_eta with eta making the law recurrent.
  static AlphaLaw recurrent_family(double x);
  /// Two-point family with eta chosen so that <rho^s> = 1.
  static AlphaLaw s_transient_family(double x, double s);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool non_degenerate() const noexcept { return atoms_.size() >= 2; }
  /// min(min omega, 1 - max omega)
  double ellipticity() const noexcept { return ellipticity_; }

  /// Law of 1 - omega(0); turns left-transient laws into right-transient ones.
  AlphaLaw reflected() const;
  /// Laws of omega and 1 - omega agree (atoms matched within 1e-12).
  bool symmetric() const noexcept;

  double mean_omega() const noexcept;
  double mean_inverse_omega() const noexcept;

  /// `atoms=[(omega,weight),...]` with round-trip precision.
  std::string to_string() const;

 private:
  std::vector<Atom> atoms_;
  double ellipticity_ = 0.0;
};

double rho(double omega) noexcept;

/// <rho^s>, exact finite sum.
double rho_moment(const AlphaLaw& alpha, double s);
double log_rho_mean(const AlphaLaw& alpha) noexcept;
/// sigma_0^2 = <log^2 rho>
double log_rho_second_moment(const AlphaLaw& alpha) noexcept;

Regime classify(const AlphaLaw& alpha) noexcept;

struct SpeedReport {
  double speed = 0.0;  // signed: negative for left-transient laws
  Regime regime = Regime::recurrent;
  bool zero_speed_transient = false;
};

/// Almost-sure limit of Z_n / n. Left-transient laws are handled through the
/// reflection; recurrent input yields speed 0 annotated with its regime.
SpeedReport speed(const AlphaLaw& alpha);

/// eta in (0, 1) with x log((1-x)/x) + (1-x) log((1-eta)/eta) = 0.
double solve_eta_recurrent(double x);

/// eta in (0, 1) with x ((1-x)/x)^s + (1-x) ((1-eta)/eta)^s = 1.
/// Throws NoRootError when x ((1-x)/x)^s >= 1.
double solve_eta_s_transient(double x, double s);

/// The s > 0 with <rho^s> = 1 for right-transient laws. Returns +infinity when
/// every rho <= 1, and nullopt when the law is recurrent or left-transient.
std::optional<double> transience_index(const AlphaLaw& alpha);

struct MomentReport {
  double log_rho_mean = 0.0;
  double sigma0_sq = 0.0;
  double rho_mean = 0.0;
  Regime regime = Regime::recurrent;
  double speed = 0.0;
  std::optional<double> s_index;
};

MomentReport moment_report(const AlphaLaw& alpha);

}  // namespace cw
