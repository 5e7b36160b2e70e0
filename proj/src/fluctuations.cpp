#include "cw/fluctuations.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "cw/error.hpp"
#include "cw/kesten.hpp"
#include "cw/parallel.hpp"
#include "cw/walk.hpp"

namespace cw {

namespace {

constexpr std::uint64_t kVarianceStreamTag = 0x56415249ULL;
constexpr std::size_t kTrendWindow = 10;

std::size_t resolve_workers(std::size_t workers) { return workers ? workers : default_workers(); }

double log_sum_exp(std::span<const double> v) {
  double m = -HUGE_VAL;
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

std::string_view to_string(VarianceMethod method) noexcept {
  switch (method) {
    case VarianceMethod::dp: return "dp";
    case VarianceMethod::mc: return "mc";
    case VarianceMethod::asymptotic: return "asymptotic";
  }
  return "unknown";
}

std::string_view to_string(RegimeTag tag) noexcept {
  switch (tag) {
    case RegimeTag::gaussian: return "gaussian";
    case RegimeTag::mixture: return "mixture";
    case RegimeTag::pure_kesten: return "pure_kesten";
    case RegimeTag::boundary_mixture: return "boundary_mixture";
    case RegimeTag::inconclusive: return "inconclusive";
  }
  return "unknown";
}

std::string_view to_string(SignVerdict verdict) noexcept {
  switch (verdict) {
    case SignVerdict::positive: return "positive";
    case SignVerdict::negative: return "negative";
    case SignVerdict::indeterminate: return "indeterminate";
  }
  return "unknown";
}

VarianceEstimate increment_variance(const AlphaLaw& alpha, std::int64_t T, const VarianceBudget& budget,
                                    std::uint64_t seed) {
  if (T < 0) throw DomainError("interval length must be non-negative");
  VarianceEstimate e;
  e.length = T;
  e.log_length = T > 0 ? std::log(static_cast<double>(T)) : -HUGE_VAL;
  const std::uint64_t stream = derive_seed(seed, static_cast<std::uint64_t>(T), kVarianceStreamTag);
  if (T == 0) {
    e.log_variance = -HUGE_VAL;
    return e;
  }
  if (T <= budget.dp_cap) {
    e.method = VarianceMethod::dp;
    const std::size_t n_env = std::max<std::size_t>(budget.dp_env_samples, 2);
    std::vector<double> m1(n_env), m2(n_env);
    parallel_for(n_env, resolve_workers(budget.workers), [&](std::size_t i) {
      EnvironmentWindow env(alpha, derive_seed(stream, i, 0), -T, T);
      const auto q = quenched_moments(env, {T}, budget.dp_cap);
      m1[i] = q[0].mean;
      m2[i] = q[0].second_moment;
    });
    MomentAccumulator a1, a2;
    for (std::size_t i = 0; i < n_env; ++i) {
      a1.add(m1[i]);
      a2.add(m2[i]);
    }
    const double mu = a1.mean();
    e.mean = mu;
    e.mean_se = std::sqrt(a1.variance() / static_cast<double>(n_env));
    e.variance = a2.mean() - mu * mu;
    // Delta method: the influence of environment i is m2_i - 2 mu m1_i.
    MomentAccumulator psi;
    for (std::size_t i = 0; i < n_env; ++i) psi.add(m2[i] - 2.0 * mu * m1[i]);
    e.variance_se = std::sqrt(psi.variance() / static_cast<double>(n_env));
  } else {
    const double steps = static_cast<double>(T);
    if (steps * static_cast<double>(budget.min_replicas) > budget.mc_step_budget)
      throw CapExceededError("T = " + std::to_string(T) + " exceeds the Monte Carlo step budget");
    e.method = VarianceMethod::mc;
    const auto affordable = static_cast<std::size_t>(budget.mc_step_budget / steps);
    const std::size_t replicas = std::clamp(affordable, budget.min_replicas, budget.max_replicas);
    SimulationOptions options;
    options.workers = budget.workers;
    const TrajectoryBatch batch = simulate_rwre_annealed(alpha, T, replicas, stream, options);
    std::vector<double> z(batch.final_positions.begin(), batch.final_positions.end());
    const MomentsReport m = moments_with_se(z);
    e.mean = m.mean;
    e.mean_se = m.mean_se;
    e.variance = m.variance;
    e.variance_se = m.variance_se;
  }
  e.log_variance = e.variance > 0.0 ? std::log(e.variance) : -HUGE_VAL;
  return e;
}

VarianceReport increment_variances(const AlphaLaw& alpha, const CoolingMap& map,
                                   std::int64_t upto_interval, const VarianceBudget& budget,
                                   std::uint64_t seed) {
  if (upto_interval < 1) throw DomainError("increment_variances needs upto_interval >= 1");
  const bool recurrent = classify(alpha) == Regime::recurrent;
  VarianceReport report;
  std::map<std::int64_t, VarianceEstimate> cache;
  const VarianceEstimate* largest = nullptr;
  for (std::int64_t k = 1; k <= upto_interval; ++k) {
    const double log_t = map.log_increment(k);
    const bool representable = log_t < std::log(static_cast<double>(kMaxScheduleTime));
    const std::int64_t T = representable ? map.increment(k) : -1;
    const bool measurable =
        representable && (T <= budget.dp_cap ||
                          static_cast<double>(T) * static_cast<double>(budget.min_replicas) <= budget.mc_step_budget);
    VarianceEstimate e;
    if (measurable) {
      auto it = cache.find(T);
      if (it == cache.end()) it = cache.emplace(T, increment_variance(alpha, T, budget, seed)).first;
      e = it->second;
      if (!largest || T > largest->length) largest = &it->second;
    } else {
      if (!largest || !(largest->variance > 0.0) || largest->length < 2)
        throw CapExceededError("no measured interval to anchor the asymptotic variance model");
      e.method = VarianceMethod::asymptotic;
      e.length = T;
      e.log_length = representable ? std::log(static_cast<double>(T)) : log_t;
      const double anchor_log_t = largest->log_length;
      if (recurrent) {
        e.log_variance = largest->log_variance + 4.0 * (std::log(e.log_length) - std::log(anchor_log_t));
      } else {
        e.log_variance = largest->log_variance + (e.log_length - anchor_log_t);
      }
      e.variance = std::exp(e.log_variance);
      e.variance_se = e.variance * (largest->variance_se / largest->variance);
      std::ostringstream w;
      w << "interval " << k << ": T beyond the Monte Carlo budget, variance from the "
        << (recurrent ? "kappa log^4 T" : "kappa T") << " model anchored at T = " << largest->length;
      report.warnings.push_back(w.str());
    }
    e.interval = k;
    report.estimates.push_back(e);
  }
  return report;
}

std::vector<double> refresh_weights(std::span<const double> log_variances) {
  std::vector<double> out;
  out.reserve(log_variances.size());
  for (std::size_t k = 0; k < log_variances.size(); ++k) {
    const double total = log_sum_exp(log_variances.subspan(0, k + 1));
    out.push_back(std::isfinite(total) ? std::exp(0.5 * (log_variances[k] - total)) : 0.0);
  }
  return out;
}

WeightProfile weight_profile(std::span<const double> variances, const CoolingMap& map, std::int64_t n) {
  const Location loc = map.locate(n);
  if (static_cast<std::int64_t>(variances.size()) != loc.interval)
    throw DomainError("weight_profile needs " + std::to_string(loc.interval) +
                      " variances (boundary first), got " + std::to_string(variances.size()));
  WeightProfile p;
  p.n = n;
  p.variances.assign(variances.begin(), variances.end());
  if (loc.boundary_time == 0) p.variances[0] = 0.0;
  for (double v : p.variances) {
    if (!(v >= 0.0)) throw DomainError("variances must be non-negative");
    p.total_variance += v;
  }
  if (!(p.total_variance > 0.0)) throw DomainError("total variance must be positive");
  std::vector<double> w;
  for (double v : p.variances) w.push_back(std::sqrt(v / p.total_variance));
  // Rounding can push the norm a hair above one; renormalize.
  double norm = 0.0;
  for (double x : w) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : w) x /= norm;
  p.weights = MixtureWeights(std::move(w));
  p.sorted = p.weights.sorted_desc();
  p.boundary_pinned = p.weights.boundary_pinned();
  return p;
}

RegimeClassification classify_lambdas(std::vector<double> lambdas) {
  if (lambdas.size() < 3) throw DomainError("regime classification needs at least 3 intervals");
  RegimeClassification c;
  c.lambdas = std::move(lambdas);
  const std::size_t window = std::min(kTrendWindow, c.lambdas.size());
  const std::span<const double> tail(c.lambdas.data() + c.lambdas.size() - window, window);
  const MomentsReport m = moments_with_se(tail);
  c.q_hat = m.mean;
  c.q_se = m.mean_se;
  c.trend = mann_kendall(tail);
  c.relative_drift = m.mean > 0.0 ? (tail.back() - tail.front()) / m.mean : 0.0;

  if (c.q_hat >= 0.97) c.tag = RegimeTag::pure_kesten;
  else if (c.trend.p_decreasing < 0.05 && c.relative_drift < -0.05) c.tag = RegimeTag::gaussian;
  else if (c.q_hat <= 3.0 * c.q_se) c.tag = RegimeTag::gaussian;
  else if (c.trend.p_increasing < 0.05 && c.relative_drift > 0.05) c.tag = RegimeTag::inconclusive;
  else c.tag = RegimeTag::mixture;
  return c;
}

RegimeClassification classify_regime(const AlphaLaw& alpha, const CoolingMap& map,
                                     std::int64_t horizon, const VarianceBudget& budget,
                                     std::uint64_t seed) {
  if (classify(alpha) != Regime::recurrent) throw DomainError("classify_regime needs a recurrent alpha");
  VarianceReport variances = increment_variances(alpha, map, horizon, budget, seed);
  std::vector<double> logs;
  for (const auto& e : variances.estimates) logs.push_back(e.log_variance);
  RegimeClassification c = classify_lambdas(refresh_weights(logs));
  c.variances = std::move(variances);
  return c;
}

RegimePrediction predict_scaling(const CoolingMap& map, const AlphaLaw& alpha) {
  if (classify(alpha) != Regime::recurrent) throw DomainError("predicted scalings cover the recurrent regime only");
  const double sigma_v = kesten::sigma();
  RegimePrediction p;
  switch (map.family()) {
    case CoolingFamily::polynomial: {
      const double beta = map.parameter_beta();
      const double B = map.parameter_b();
      const double r = beta / (beta + 1.0);
      p.tag = RegimeTag::gaussian;
      p.n_exponent = 1.0 / (2.0 * (beta + 1.0));
      p.log_exponent = 2.0;
      p.prefactor = r * r * std::pow(B, -p.n_exponent) * sigma_v;
      p.normalization = "sigma0^2 n^{1/(2(beta+1))} log^2 n";
      p.law = "prefactor * Phi";
      break;
    }
    case CoolingFamily::exponential: {
      const double c = map.parameter_c();
      p.tag = RegimeTag::gaussian;
      p.log_exponent = 2.5;
      p.prefactor = sigma_v / std::sqrt(5.0 * std::pow(c, 5));
      p.normalization = "sigma0^2 log^{5/2} n";
      p.law = "prefactor * Phi";
      break;
    }
    case CoolingFamily::double_exponential: {
      p.tag = RegimeTag::mixture;
      p.q = q_from_c(map.parameter_c());
      p.log_exponent = 2.0;
      p.prefactor = sigma_v / p.q;
      p.normalization = "sigma0^2 log^2 tau(l), along n = tau(l)";
      p.law = "q_c^{-1} sigma_V V^{(x)lambda_{q_c}}";
      break;
    }
    case CoolingFamily::faster: {
      p.tag = RegimeTag::pure_kesten;
      p.q = 1.0;
      p.log_exponent = 2.0;
      p.prefactor = 1.0;
      p.normalization = "sigma0^2 log^2 tau(l), along n = tau(l)";
      p.law = "V";
      break;
    }
    default:
      throw DomainError("predict_scaling knows polynomial, exponential, doubleexp and faster cooling only");
  }
  return p;
}

BoundaryExponent boundary_exponent(const CoolingMap& map, std::int64_t n) {
  const Location loc = map.locate(n);
  if (loc.tau_prev < 2)
    throw DomainError("boundary exponent undefined: tau(l(n)-1) < 2 (n inside the first interval)");
  BoundaryExponent r;
  r.b = loc.boundary_time <= 1
            ? 0.0
            : std::log(static_cast<double>(loc.boundary_time)) / std::log(static_cast<double>(loc.tau_prev));
  r.boundary_dominates = r.b > 1.0;
  r.law = r.boundary_dominates ? "boundary term dominates: b^{-2} q_c^{-1} sigma_V V^{(x)lambda_{q_c}} + V_0"
                               : "q_c^{-1} sigma_V V^{(x)lambda_{q_c}} + b^2 V_0";
  return r;
}

WeightSumReport check_weight_sum(const CoolingMap& map, std::int64_t horizon,
                                 const std::function<double(double)>& variance_model) {
  if (horizon < 1) throw DomainError("check_weight_sum needs horizon >= 1");
  const auto var = [&](double t) { return variance_model ? variance_model(t) : t; };
  WeightSumReport r;
  double sum_sd = 0.0;   // sum of sqrt(Var(Y_i)) over completed intervals
  double sum_var = 0.0;
  double sup = 0.0;
  for (std::int64_t k = 1; k <= horizon; ++k) {
    const double T = std::exp(map.log_increment(k));
    // Boundary of length t in [0, T): f(t) = (A + s(t)) / sqrt(B + s(t)^2) with s = sqrt(Var(t)).
    const auto f = [&](double t) {
      const double s = std::sqrt(std::max(0.0, var(t)));
      return (sum_sd + s) / std::sqrt(sum_var + s * s);
    };
    if (sum_var > 0.0) {
      sup = std::max(sup, f(0.0));
      // For Var = t the maximizer is t* = (B / A)^2; otherwise sample the interval too.
      const double t_star = sum_sd > 0.0 ? (sum_var / sum_sd) * (sum_var / sum_sd) : 0.0;
      if (!variance_model && t_star < T) sup = std::max(sup, f(t_star));
      if (variance_model)
        for (int i = 1; i < 64; ++i) sup = std::max(sup, f(T * i / 64.0));
    } else {
      sup = std::max(sup, 1.0);
    }
    const double v = var(T);
    sum_sd += std::sqrt(v);
    sum_var += v;
    sup = std::max(sup, sum_sd / std::sqrt(sum_var));
    r.running_sup.push_back(sup);
  }
  r.sup = sup;
  const double half = r.running_sup[static_cast<std::size_t>(std::max<std::int64_t>(horizon / 2, 1)) - 1];
  r.bounded = (r.sup - half) <= 0.01 * r.sup;
  return r;
}

MeanSignScan scan_mean_sign(const std::function<AlphaLaw(double)>& family,
                            const std::vector<double>& x_grid, const std::vector<std::int64_t>& n_grid,
                            std::size_t env_samples, std::uint64_t seed, bool subtract_speed,
                            double margin, std::size_t workers) {
  MeanSignScan scan;
  for (std::size_t xi = 0; xi < x_grid.size(); ++xi) {
    const double x = x_grid[xi];
    const AlphaLaw alpha = family(x);
    const double v = subtract_speed ? speed(alpha).speed : 0.0;
    const std::vector<MeanEstimate> means =
        annealed_means(alpha, n_grid, env_samples, derive_seed(seed, xi, 0), workers);
    std::size_t pos = 0, neg = 0;
    for (std::size_t j = 0; j < n_grid.size(); ++j) {
      MeanSignRow row;
      row.x = x;
      row.n = n_grid[j];
      row.estimate = means[j].estimate - v * static_cast<double>(n_grid[j]);
      row.standard_error = means[j].standard_error;
      if (row.estimate > margin * row.standard_error && row.estimate > 1e-12) {
        row.verdict = SignVerdict::positive;
        ++pos;
      } else if (row.estimate < -margin * row.standard_error && row.estimate < -1e-12) {
        row.verdict = SignVerdict::negative;
        ++neg;
      }
      scan.rows.push_back(row);
    }
    scan.positive_counts.push_back(pos);
    scan.negative_counts.push_back(neg);
  }
  return scan;
}

MeanDecayReport check_mean_decay(const AlphaLaw& alpha, const std::vector<std::int64_t>& n_grid,
                                 double gamma, std::size_t env_samples, std::uint64_t seed,
                                 std::size_t workers) {
  if (!(gamma > 0.0 && gamma < 2.0 / 3.0)) throw DomainError("mean decay needs gamma in (0, 2/3)");
  for (std::int64_t n : n_grid)
    if (n < 3) throw DomainError("mean decay grid needs n >= 3 so that log n > 1");
  MeanDecayReport r;
  r.gamma = gamma;
  const double sigma0_sq = log_rho_second_moment(alpha);
  const std::vector<MeanEstimate> means = annealed_means(alpha, n_grid, env_samples, seed, workers);
  std::vector<double> ratios;
  for (std::size_t j = 0; j < n_grid.size(); ++j) {
    const double ln = std::log(static_cast<double>(n_grid[j]));
    MeanDecayRow row;
    row.n = n_grid[j];
    row.estimate = means[j].estimate;
    row.standard_error = means[j].standard_error;
    row.ratio = std::abs(row.estimate) * std::pow(ln, gamma) / (sigma0_sq * ln * ln);
    r.fitted_c = std::max(r.fitted_c, row.ratio);
    ratios.push_back(row.ratio);
    r.rows.push_back(row);
  }
  if (ratios.size() >= 3) {
    r.trend = mann_kendall(ratios);
    r.upward_trend = r.trend.p_increasing < 0.05;
  }
  return r;
}

}  // namespace cw
