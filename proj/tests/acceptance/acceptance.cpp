// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run all thirteen
//   acceptance --only N   run criterion N
#include <CLI11.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cw/alpha_law.hpp"
#include "cw/cli/commands.hpp"
#include "cw/cli/config.hpp"
#include "cw/cooling.hpp"
#include "cw/environment.hpp"
#include "cw/fluctuations.hpp"
#include "cw/kesten.hpp"
#include "cw/mixture.hpp"
#include "cw/stats.hpp"
#include "cw/walk.hpp"

using namespace cw;
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

std::vector<double> as_doubles(const std::vector<std::int64_t>& v) { return {v.begin(), v.end()}; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cw_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void run_cli(const std::string& sub, const std::string& config, const fs::path& out) {
  cli::Config c = cli::Config::parse(config);
  std::ostringstream log;
  cli::run_subcommand(sub, c, out, log);
}

const AlphaLaw kSymmetric({{1.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}});

// 1. Speed of the quenched walk.
Outcome speed_check() {
  const std::int64_t n = 100000;
  const TrajectoryBatch fast = simulate_rwre_annealed(AlphaLaw({{0.75, 1.0}}), n, 10000, 101);
  const double v = moments_with_se(as_doubles(fast.final_positions)).mean / static_cast<double>(n);
  const TrajectoryBatch zero = simulate_rwre_annealed(AlphaLaw({{0.7, 0.8}, {0.15, 0.2}}), n, 1000, 102);
  const double z = moments_with_se(as_doubles(zero.final_positions)).mean / static_cast<double>(n);
  return {std::abs(v - 0.5) <= 0.005 && std::abs(z) <= 0.02,
          "Z_n/n = " + fmt(v) + " (target 0.5 +- 1%); zero-speed Z_n/n = " + fmt(z) + " (bound 0.02)"};
}

// 2. speed * annealed sigma series = 1.
Outcome speed_identity() {
  SplitMix64 rng(201);
  double worst = 0.0;
  int laws = 0;
  while (laws < 50) {
    const AlphaLaw a = AlphaLaw::s_transient_family(0.52 + 0.46 * rng.uniform(), 1.01 + 5.0 * rng.uniform());
    if (!(rho_moment(a, 1.0) < 1.0)) continue;
    worst = std::max(worst, std::abs(speed(a).speed * sigma_series_annealed(a) - 1.0));
    ++laws;
  }
  return {worst <= 1e-12, "max |v * Sigma - 1| = " + fmt(worst) + " over 50 laws"};
}

// 3. Monte Carlo against the exact DP.
Outcome dp_vs_mc() {
  const std::size_t replicas = 1000000;
  std::size_t sites = 0, inside = 0;
  for (std::uint64_t e = 0; e < 20; ++e) {
    const EnvironmentWindow env = sample_window(kSymmetric, derive_seed(301, e, 0), -30, 30);
    const QuenchedDistribution d = exact_quenched_distribution(env, 0, 30);
    const TrajectoryBatch b = simulate_rwre(env, 0, 30, replicas, derive_seed(301, e, 1));
    std::map<std::int64_t, std::size_t> counts;
    for (std::int64_t x : b.final_positions) ++counts[x];
    for (std::int64_t x = -30; x <= 30; x += 2) {
      const double p = d.at(x);
      const double f = static_cast<double>(counts[x]) / static_cast<double>(replicas);
      ++sites;
      inside += std::abs(f - p) <= 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(replicas)) + 1e-15;
    }
  }
  const double frac = static_cast<double>(inside) / static_cast<double>(sites);
  return {frac >= 0.95, fmt(100.0 * frac) + "% of " + std::to_string(sites) + " sites within 3 binomial SE"};
}

// 4. Hitting formulas against the linear-system oracles, plus Monte Carlo.
Outcome hitting() {
  const AlphaLaw alpha({{0.3, 0.5}, {0.75, 0.5}});
  double max_hit = 0.0, max_time = 0.0;
  std::size_t within = 0;
  const std::size_t envs = 200, replicas = 20000;
  for (std::size_t i = 0; i < envs; ++i) {
    SplitMix64 g(derive_seed(401, i, 7));
    const std::int64_t width = 2 + static_cast<std::int64_t>(g.next() % 19);  // 2..20
    const std::int64_t a = -1 - static_cast<std::int64_t>(g.next() % static_cast<std::uint64_t>(width - 1));
    const std::int64_t b = a + width;
    const std::int64_t x = a + 1 + static_cast<std::int64_t>(g.next() % static_cast<std::uint64_t>(width - 1));
    const EnvironmentWindow env = sample_window(alpha, derive_seed(401, i, 0), a, b);
    const double h = hit_prob(env, x, a, b);
    max_hit = std::max(max_hit, std::abs(h - hit_prob_linear_solve(env, x, a, b)));
    const double t_oracle = expected_hit_time_linear_solve(env, a, b, x);
    max_time = std::max(max_time, std::abs(expected_hit_time_reflected(env, a, b, x) - t_oracle) / std::max(1.0, t_oracle));
    const MeanEstimate mc = hit_prob_monte_carlo(env, x, a, b, replicas, derive_seed(401, i, 1));
    within += std::abs(mc.estimate - h) <= 3.0 * std::sqrt(h * (1.0 - h) / static_cast<double>(replicas)) + 1e-15;
  }
  const double frac = static_cast<double>(within) / static_cast<double>(envs);
  return {max_hit <= 1e-10 && max_time <= 1e-10 && frac >= 0.95,
          "max hit diff " + fmt(max_hit) + ", max relative time diff " + fmt(max_time) + ", MC within 3 SE in " +
              fmt(100.0 * frac) + "% of " + std::to_string(envs) + " environments"};
}

// 5. Kesten law numerics.
Outcome kesten_numerics() {
  using boost::math::quadrature::gauss_kronrod;
  // Split at the scales where the density changes shape so the adaptive rule sees the peak.
  const auto integrate = [](const std::function<double(double)>& f) {
    const double cuts[] = {0.0, 1.0, 5.0, 20.0, 60.0};
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < std::size(cuts); ++i)
      total += gauss_kronrod<double, 61>::integrate(f, cuts[i], cuts[i + 1], 15, 1e-14) +
               gauss_kronrod<double, 61>::integrate(f, -cuts[i + 1], -cuts[i], 15, 1e-14);
    return total;
  };
  const double mass = integrate([](double x) { return kesten::density(x); });
  const double var = integrate([](double x) { return x * x * kesten::density(x); });
  const double v0 = kesten::density(0.0);
  const auto s = kesten::sample(501, 100000);
  const double ks = ks_distance(EmpiricalSample(s), [](double x) { return kesten::cdf(x); });
  const double crit = ks_critical_value(s.size());
  const bool ok = std::abs(mass - 1.0) <= 1e-10 && std::abs(v0 - 0.5) <= 1e-12 &&
                  std::abs(var - kesten::variance()) <= 1e-9 && ks < crit;
  return {ok, "int v = 1 + " + fmt(mass - 1.0) + ", v(0) - 1/2 = " + fmt(v0 - 0.5) + ", sigma_V^2 = " +
                  fmt(kesten::variance()) + " (quadrature diff " + fmt(var - kesten::variance()) + "), KS " + fmt(ks) +
                  " < " + fmt(crit)};
}

// 6. Sinai regime at n = 10^6.
Outcome sinai() {
  const std::int64_t n = 1000000;
  const TrajectoryBatch b = simulate_rwre_annealed(kSymmetric, n, 5000, 601);
  const double L = std::log(static_cast<double>(n));
  const double s0 = log_rho_second_moment(kSymmetric);
  std::vector<double> z;
  for (std::int64_t x : b.final_positions) z.push_back(static_cast<double>(x) / (s0 * L * L));
  const MomentsReport m = moments_with_se(z);
  const double ks = ks_distance(EmpiricalSample(z), [](double x) { return kesten::cdf(x); });
  const double rel = m.variance / kesten::variance() - 1.0;
  // Diagnostic only: the same sample under the scaling sigma0^2 Z_n / log^2 n.
  std::vector<double> alt;
  for (std::int64_t x : b.final_positions) alt.push_back(static_cast<double>(x) * s0 / (L * L));
  const double ks_alt = ks_distance(EmpiricalSample(alt), [](double x) { return kesten::cdf(x); });
  const double var_alt = moments_with_se(alt).variance;
  return {ks <= 0.15 && std::abs(rel) <= 0.35 && std::abs(m.skew) <= 4.0 * m.skew_se,
          "Z_n/(sigma0^2 log^2 n): KS " + fmt(ks) + " (bound 0.15), variance " + fmt(m.variance) + " vs " +
              fmt(kesten::variance()) + " (" + fmt(100.0 * rel) + "%, bound 35%), skew " + fmt(m.skew) + " +- " +
              fmt(m.skew_se) + "; diagnostic sigma0^2 Z_n/log^2 n: KS " + fmt(ks_alt) + ", variance " + fmt(var_alt)};
}

// 7. Gaussian regime under polynomial and geometric cooling.
Outcome gaussian() {
  const AlphaLaw alpha({{2.0 / 3.0, 8.0 / 9.0}, {1.0 / 3.0, 1.0 / 9.0}});
  const std::int64_t n = 1000000;
  const auto standardized_ks = [](const std::vector<double>& x, double center) {
    const MomentsReport m = moments_with_se(x);
    const double sd = std::sqrt(m.variance);
    std::vector<double> z;
    for (double v : x) z.push_back((v - center) / sd);
    return ks_distance(EmpiricalSample(z), [](double t) { return normal_cdf(t); });
  };
  const TrajectoryBatch p = simulate_rwcre(alpha, CoolingMap::polynomial(1, 2), n, 5000, 701);
  const auto xp = as_doubles(p.final_positions);
  const double ks_poly = standardized_ks(xp, moments_with_se(xp).mean);
  const TrajectoryBatch g = simulate_rwcre(alpha, CoolingMap::exponential(std::numbers::ln2), n, 5000, 702);
  const auto xg = as_doubles(g.final_positions);
  const double ks_geo = standardized_ks(xg, speed(alpha).speed * static_cast<double>(n));
  return {ks_poly <= 0.05 && ks_geo <= 0.05,
          "T_k = k^2: KS " + fmt(ks_poly) + "; T_k = 2^k centered by v n: KS " + fmt(ks_geo) + " (bound 0.05)"};
}

// 8. Geometric weights from constant-ratio variance sequences.
Outcome mixture_algebra() {
  double worst = 0.0;
  for (double q : {0.1, 1.0 / std::sqrt(2.0), 0.99}) {
    const std::size_t K = 40;
    std::vector<double> v{1.0};
    double total = 1.0;
    for (std::size_t k = 1; k < K; ++k) {
      const double next = total / (1.0 - q * q);
      v.push_back(next - total);
      total = next;
    }
    const CoolingMap map = CoolingMap::explicit_increments(std::vector<std::int64_t>(K + 1, 3));
    std::vector<double> with_boundary{0.0};
    with_boundary.insert(with_boundary.end(), v.begin(), v.end());
    const WeightProfile p = weight_profile(with_boundary, map, 3 * static_cast<std::int64_t>(K));
    const MixtureWeights lq = lambda_q(q, K);
    // The j-th most recent interval carries lambda_q(j); interval 1 carries the leftover mass.
    for (std::size_t j = 1; j < K; ++j) {
      const double got = p.weights[K + 1 - j];
      worst = std::max(worst, std::abs(got * got - q * q * std::pow(1.0 - q * q, static_cast<double>(j - 1))));
      worst = std::max(worst, std::abs(got - lq[j]));
    }
  }
  const double qc = std::abs(q_from_c(std::numbers::ln2 / 4.0) - 1.0 / std::sqrt(2.0));
  return {worst <= 1e-12 && qc <= 1e-12, "max weight error " + fmt(worst) + ", |q_c - 1/sqrt 2| = " + fmt(qc)};
}

// 9. Regime classifier on the four cooling families.
Outcome classifier() {
  const AlphaLaw alpha = kSymmetric;
  VarianceBudget budget;
  budget.dp_env_samples = 400;
  budget.mc_step_budget = 2e8;
  const auto run = [&](const CoolingMap& map, std::int64_t horizon, std::uint64_t seed) {
    return classify_regime(alpha, map, horizon, budget, seed);
  };
  const RegimeClassification poly = run(CoolingMap::polynomial(1, 2), 40, 901);
  const RegimeClassification expo = run(CoolingMap::exponential(1.0), 25, 902);
  const RegimeClassification dexp = run(CoolingMap::double_exponential(std::numbers::ln2 / 4.0), 25, 903);
  const RegimeClassification fast = run(CoolingMap::faster(0.5), 12, 904);
  const bool ok = poly.tag == RegimeTag::gaussian && expo.tag == RegimeTag::gaussian &&
                  dexp.tag == RegimeTag::mixture && dexp.q_hat >= 0.65 && dexp.q_hat <= 0.77 &&
                  fast.tag == RegimeTag::pure_kesten;
  const auto d = [](const char* name, const RegimeClassification& r) {
    return std::string(name) + " " + std::string(to_string(r.tag)) + " (q_hat " + fmt(r.q_hat) + ")";
  };
  return {ok, d("polynomial", poly) + ", " + d("exponential", expo) + ", " + d("doubleexp", dexp) + ", " +
                  d("faster", fast)};
}

// 10. Recurrence breaking by block maps.
Outcome breaker() {
  const fs::path out = scratch("c10");
  run_cli("break-recurrence",
          "seed = 1001\nalpha = recurrent(x=2/3)\nn_grid = [1, 2, 3, 4]\nenv_samples = 20000\n"
          "max_blocks = 3\nlast_count = 100\nreplicas = 1000\n",
          out);
  const Json j = Json::parse(slurp(out / "breaker.json"));
  const Json first = j["blocks"][0];
  const bool n1 = first["length"] == 1 && first["mean"].get<double>() > 5.0 * first["standard_error"].get<double>();
  const bool ok = n1 && j["final_mean_ci99_positive"].get<bool>() && j["grows_across_blocks"].get<bool>();
  std::string ends;
  for (const auto& e : j["block_ends"]) ends += " " + fmt(e["mean"].get<double>()) + "+-" + fmt(e["standard_error"].get<double>());
  return {ok, "map " + j["cooling"].get<std::string>() + ", n1 mean " + fmt(first["mean"].get<double>()) +
                  ", block-end means" + ends};
}

// 11. Mean decay trend.
Outcome mean_decay() {
  const MeanDecayReport r = check_mean_decay(AlphaLaw::recurrent_family(2.0 / 3.0),
                                             {64, 128, 256, 512, 1024, 2048, 4096}, 0.6, 2000, 1101);
  std::string ratios;
  for (const auto& row : r.rows) ratios += " " + fmt(row.ratio);
  return {r.trend.p_increasing > 0.05,
          "Mann-Kendall p_increasing " + fmt(r.trend.p_increasing) + ", fitted C " + fmt(r.fitted_c) + ", ratios" + ratios};
}

// 12. Localization at the valley bottom.
Outcome valley() {
  const fs::path out = scratch("c12");
  run_cli("valley", "seed = 1201\nalpha = atoms=[(1/3, 1/2), (2/3, 1/2)]\nn = 100000\nenvironments = 500\n", out);
  const Json j = Json::parse(slurp(out / "valley.json"));
  const double rho = j["correlation"].is_number() ? j["correlation"].get<double>() : std::nan("");
  return {rho > 0.8, "corr(Z_n/(sigma0^2 log^2 n), b) = " + fmt(rho) + " (bound 0.8), windows exhausted " +
                         std::to_string(j["window_exhausted"].get<int>())};
}

// 13. Byte-identical artifacts across reruns and worker counts.
Outcome determinism() {
  const std::vector<std::pair<std::string, std::string>> runs{
      {"classify", "seed = 1\nalpha = recurrent(x=2/3)\n"},
      {"kesten-table", "seed = 1\npoints = 41\nmixture_q = 0.7\n"},
      {"simulate", "seed = 2\nalpha = recurrent(x=2/3)\ncooling = polynomial(B=1, beta=2)\nn = 20000\nreplicas = 500\n"
                   "record_leftmost = true\nrecord_increments = true\n"},
      {"simulate", "seed = 3\nalpha = atoms=[(0.3,0.5),(0.8,0.5)]\nmode = rwre\nn = 5000\nreplicas = 500\n"
                   "dump_environment = true\n"},
      {"limit-check", "seed = 4\nalpha = atoms=[(2/3, 8/9), (1/3, 1/9)]\ncooling = polynomial(B=1, beta=2)\n"
                      "n = 20000\nreplicas = 500\ncentering_speed = true\n"},
      {"regime", "seed = 5\nalpha = recurrent(x=2/3)\ncooling = exponential(c=1)\nhorizon = 10\ndp_env_samples = 50\n"
                 "mc_step_budget = 1e6\nmin_replicas = 50\n"},
      {"scan-mean", "seed = 6\nx_grid = [0.3, 0.5, 0.7]\nn_grid = [1, 10, 50]\nenv_samples = 100\n"},
      {"mean-decay", "seed = 7\nalpha = recurrent(x=2/3)\nn_grid = [16, 32, 64, 128]\nenv_samples = 100\n"},
      {"break-recurrence", "seed = 8\nalpha = recurrent(x=2/3)\nn_grid = [1, 2]\nenv_samples = 20000\nmax_blocks = 2\n"
                           "last_count = 10\nreplicas = 100\n"},
      {"valley", "seed = 9\nalpha = atoms=[(1/3, 1/2), (2/3, 1/2)]\nn = 2000\nenvironments = 40\n"},
      {"hit-check", "seed = 10\nalpha = atoms=[(0.3,0.5),(0.8,0.5)]\nenvironments = 20\nmax_width = 20\nreplicas = 1000\n"},
  };
  std::size_t compared = 0;
  std::vector<std::string> mismatches;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::map<std::string, std::string> reference;
    for (const char* workers : {"1", "8", "8"}) {
      setenv("COOLING_WALK_WORKERS", workers, 1);
      const fs::path out = scratch("c13_" + std::to_string(i) + "_" + workers);
      run_cli(runs[i].first, runs[i].second, out);
      std::map<std::string, std::string> files;
      for (const auto& e : fs::directory_iterator(out))
        if (e.path().filename() != "manifest.json") files[e.path().filename().string()] = slurp(e.path());
      if (reference.empty()) {
        reference = files;
        continue;
      }
      ++compared;
      if (files != reference) mismatches.push_back(runs[i].first);
    }
  }
  unsetenv("COOLING_WALK_WORKERS");
  std::string detail = std::to_string(compared) + " reruns of " + std::to_string(runs.size()) +
                       " subcommand configs compared byte for byte (workers 1, 8, 8)";
  for (const auto& m : mismatches) detail += "; mismatch in " + m;
  return {mismatches.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--only", only, "run a single criterion (1-13)")->check(CLI::Range(1, 13));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> criteria{speed_check, speed_identity, dp_vs_mc,   hitting,
                                                       kesten_numerics, sinai,      gaussian,  mixture_algebra,
                                                       classifier,  breaker,        mean_decay, valley,
                                                       determinism};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << "  [" << fmt(secs)
              << " s]" << std::endl;
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
