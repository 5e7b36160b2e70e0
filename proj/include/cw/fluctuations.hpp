#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cw/alpha_law.hpp"
#include "cw/cooling.hpp"
#include "cw/mixture.hpp"
#include "cw/stats.hpp"

namespace cw {

enum class VarianceMethod { dp, mc, asymptotic };
std::string_view to_string(VarianceMethod method) noexcept;

struct VarianceEstimate {
  std::int64_t interval = 0;  // k; 0 for a boundary stretch
  std::int64_t length = 0;    // T_k, or -1 when T_k is not representable
  double log_length = 0.0;    // log T_k
  double mean = 0.0;
  double mean_se = 0.0;
  double variance = 0.0;
  double variance_se = 0.0;
  double log_variance = 0.0;  // finite even when variance overflows
  VarianceMethod method = VarianceMethod::dp;
};

struct VarianceBudget {
  std::int64_t dp_cap = 4096;
  std::size_t dp_env_samples = 400;
  double mc_step_budget = 2e8;  // walk steps per Monte Carlo estimate
  std::size_t min_replicas = 400;
  std::size_t max_replicas = 20000;
  std::size_t workers = 0;
};

struct VarianceReport {
  std::vector<VarianceEstimate> estimates;  // intervals 1..upto
  std::vector<std::string> warnings;
};

/// Annealed mean and variance of Z_T for one interval length. Exact DP averaged
/// over environments when T <= dp_cap, Monte Carlo otherwise.
VarianceEstimate increment_variance(const AlphaLaw& alpha, std::int64_t T, const VarianceBudget& budget,
                                    std::uint64_t seed);

/// Var(Y_k) for k = 1..upto_interval. Lengths beyond the Monte Carlo budget use
/// an asymptotic model matched to the largest measured length: kappa log^4 T for
/// recurrent laws and kappa T otherwise; every such use adds a warning.
VarianceReport increment_variances(const AlphaLaw& alpha, const CoolingMap& map,
                                   std::int64_t upto_interval, const VarianceBudget& budget,
                                   std::uint64_t seed);

/// lambda_{tau,tau(k)}(k) = sqrt(Var(Y_k) / sum_{i<=k} Var(Y_i)) for k = 1..size.
std::vector<double> refresh_weights(std::span<const double> log_variances);

struct WeightProfile {
  std::int64_t n = 0;
  std::vector<double> variances;  // index 0 is the boundary increment
  double total_variance = 0.0;    // Var(X_n)
  MixtureWeights weights;         // lambda_{tau,n}(k), k = 0..l(n)-1
  MixtureWeights sorted;          // decreasing rearrangement
  MixtureWeights boundary_pinned;
};

/// Normalized weights from Var(Y_0 = boundary), Var(Y_1), ..., Var(Y_{l(n)-1}).
/// Throws DomainError when the count does not match l(n).
WeightProfile weight_profile(std::span<const double> variances, const CoolingMap& map, std::int64_t n);

enum class RegimeTag { gaussian, mixture, pure_kesten, boundary_mixture, inconclusive };
std::string_view to_string(RegimeTag tag) noexcept;

struct RegimeClassification {
  RegimeTag tag = RegimeTag::inconclusive;
  double q_hat = 0.0;       // last-window mean of lambda_{tau,tau(k)}(k)
  double q_se = 0.0;
  TrendTest trend;
  double relative_drift = 0.0;  // (last - first) / mean over the window
  std::vector<double> lambdas;  // k = 1..horizon
  VarianceReport variances;
};

/// Estimates lambda_{tau,tau(k)}(k) up to `horizon` and reads the limit off the
/// last ten values: mean >= 0.97 gives pure_kesten, a significant decrease of
/// more than 5% (or a mean within 3 SE of 0) gives gaussian, a significant
/// increase is inconclusive, and a stable window gives mixture(q_hat).
RegimeClassification classify_regime(const AlphaLaw& alpha, const CoolingMap& map,
                                     std::int64_t horizon, const VarianceBudget& budget,
                                     std::uint64_t seed);

/// Same decision rule on a precomputed lambda sequence.
RegimeClassification classify_lambdas(std::vector<double> lambdas);

struct RegimePrediction {
  RegimeTag tag = RegimeTag::gaussian;
  double q = 0.0;
  double n_exponent = 0.0;    // power of n in the normalization
  double log_exponent = 0.0;  // power of log n (or log tau(l) for doubleexp)
  double prefactor = 0.0;
  std::string normalization;
  std::string law;
};

/// Scaling predicted for the cooling family of `map` in the recurrent regime.
RegimePrediction predict_scaling(const CoolingMap& map, const AlphaLaw& alpha);

struct BoundaryExponent {
  double b = 0.0;
  bool boundary_dominates = false;  // b > 1 branch
  std::string law;
};

/// b = log T^n / log tau(l(n) - 1). Throws DomainError inside the first interval.
BoundaryExponent boundary_exponent(const CoolingMap& map, std::int64_t n);

struct WeightSumReport {
  std::vector<double> running_sup;  // sup over n < tau(k) of the l1 weight norm, k = 1..horizon
  double sup = 0.0;
  bool bounded = false;  // less than 1% growth over the second half of the horizon
};

/// Running supremum of sum_k lambda_{tau,n}(k) for Var(Y_k) = variance_model(T_k);
/// the default model is Var = T. Inside each interval the supremum over the
/// boundary length is found in closed form.
WeightSumReport check_weight_sum(const CoolingMap& map, std::int64_t horizon,
                                 const std::function<double(double)>& variance_model = {});

enum class SignVerdict { positive, negative, indeterminate };
std::string_view to_string(SignVerdict verdict) noexcept;

struct MeanSignRow {
  double x = 0.0;
  std::int64_t n = 0;
  double estimate = 0.0;  // E[Z_n], minus v n when subtracting the speed
  double standard_error = 0.0;
  SignVerdict verdict = SignVerdict::indeterminate;
};

struct MeanSignScan {
  std::vector<MeanSignRow> rows;
  std::vector<std::size_t> positive_counts;  // per x
  std::vector<std::size_t> negative_counts;
};

/// Exact-DP annealed means for alpha_x over the grid; verdicts at `margin` SE.
MeanSignScan scan_mean_sign(const std::function<AlphaLaw(double)>& family,
                            const std::vector<double>& x_grid, const std::vector<std::int64_t>& n_grid,
                            std::size_t env_samples, std::uint64_t seed, bool subtract_speed = false,
                            double margin = 5.0, std::size_t workers = 0);

struct MeanDecayRow {
  std::int64_t n = 0;
  double estimate = 0.0;
  double standard_error = 0.0;
  double ratio = 0.0;  // |E[Z_n]| log^gamma n / (sigma0^2 log^2 n)
};

struct MeanDecayReport {
  double gamma = 0.0;
  std::vector<MeanDecayRow> rows;
  double fitted_c = 0.0;  // max ratio over the grid
  TrendTest trend;
  bool upward_trend = false;  // one-sided Mann-Kendall p < 0.05
};

MeanDecayReport check_mean_decay(const AlphaLaw& alpha, const std::vector<std::int64_t>& n_grid,
                                 double gamma, std::size_t env_samples, std::uint64_t seed,
                                 std::size_t workers = 0);

}  // namespace cw
