#include "cw/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "cw/cli/artifacts.hpp"
#include "cw/environment.hpp"
#include "cw/error.hpp"
#include "cw/fluctuations.hpp"
#include "cw/kesten.hpp"
#include "cw/mixture.hpp"
#include "cw/parallel.hpp"
#include "cw/stats.hpp"
#include "cw/walk.hpp"

namespace cw::cli {

namespace {

// Substream tags for streams that must not collide with replica streams.
constexpr std::uint64_t kEnvTag = 0x454e56ULL;
constexpr std::uint64_t kReferenceTag = 0x52454631ULL;
constexpr std::uint64_t kGeometryTag = 0x47454fULL;

std::size_t workers_of(const Config& c) {
  const std::int64_t w = c.integer("workers", 0);
  if (w < 0) throw ConfigError("workers must be >= 0");
  return static_cast<std::size_t>(w);
}

std::int64_t positive(const Config& c, std::string_view key, std::int64_t fallback, std::int64_t min = 1) {
  const std::int64_t v = c.integer(key, fallback);
  if (v < min) throw ConfigError(std::string(key) + " must be >= " + std::to_string(min));
  return v;
}

std::int64_t required_count(const Config& c, std::string_view key, std::int64_t min = 1) {
  const std::int64_t v = c.integer(key);
  if (v < min) throw ConfigError(std::string(key) + " must be >= " + std::to_string(min));
  return v;
}

Json moments_json(const MomentsReport& m) {
  return {{"count", m.count},      {"mean", m.mean},         {"mean_se", m.mean_se},
          {"variance", m.variance}, {"variance_se", m.variance_se}, {"skew", m.skew},
          {"skew_se", m.skew_se},  {"degenerate", m.degenerate}};
}

Json trend_json(const TrendTest& t) {
  return {{"statistic", t.statistic}, {"z", t.z}, {"p_increasing", t.p_increasing},
          {"p_decreasing", t.p_decreasing}, {"p_two_sided", t.p_two_sided}};
}

Json nullable(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

void cmd_classify(const Config& c, ArtifactSink& sink, std::ostream& log) {
  const AlphaLaw alpha = c.alpha();
  const MomentReport m = moment_report(alpha);
  const SpeedReport s = speed(alpha);
  Json body;
  body["alpha"] = alpha.to_string();
  body["regime"] = std::string(to_string(m.regime));
  body["speed"] = s.speed;
  body["zero_speed_transient"] = s.zero_speed_transient;
  body["log_rho_mean"] = m.log_rho_mean;
  body["sigma0_sq"] = m.sigma0_sq;
  body["rho_mean"] = m.rho_mean;
  if (m.s_index) body["s_index"] = std::isinf(*m.s_index) ? Json("infinite") : Json(*m.s_index);
  else body["s_index"] = nullptr;
  body["ellipticity"] = alpha.ellipticity();
  body["symmetric"] = alpha.symmetric();
  if (m.rho_mean < 1.0) body["sigma_series_annealed"] = sigma_series_annealed(alpha);
  sink.write_json("classify.json", body);
  log << "regime " << to_string(m.regime) << ", speed " << format_number(s.speed) << "\n";
}

void cmd_kesten_table(const Config& c, ArtifactSink& sink, std::ostream& log) {
  std::vector<double> grid;
  if (c.has("x")) {
    grid = c.numbers("x");
  } else {
    const double lo = c.number("x_min", -5.0);
    const double hi = c.number("x_max", 5.0);
    const std::int64_t points = positive(c, "points", 101, 2);
    if (!(hi > lo)) throw ConfigError("x_max must exceed x_min");
    for (std::int64_t i = 0; i < points; ++i)
      grid.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  std::optional<DensityGrid> mixture;
  std::vector<std::string> header{"x", "density", "cdf"};
  if (c.has("mixture_q")) {
    const MixtureLaw law(lambda_q(c.number("mixture_q")), c.boolean("mixture_gaussian", true));
    mixture = law.density_on_grid();
    header.insert(header.end(), {"mixture_density", "mixture_cdf"});
  }
  CsvTable table(header);
  for (double x : grid) {
    table.row().cell(x).cell(kesten::density(x)).cell(kesten::cdf(x));
    if (mixture) table.cell(mixture->density_at(x)).cell(mixture->cdf_at(x));
  }
  sink.write_csv("kesten_table.csv", table);
  log << grid.size() << " grid points\n";
}

// Histogram of a batch plus summary moments.
Json batch_summary(const TrajectoryBatch& batch) {
  std::vector<double> z(batch.final_positions.begin(), batch.final_positions.end());
  Json body;
  body["time"] = batch.time;
  body["start"] = batch.start;
  body["replicas"] = batch.replicas();
  if (z.size() >= 2) body["moments"] = moments_json(moments_with_se(z));
  std::map<std::int64_t, std::size_t> hist;
  for (std::int64_t x : batch.final_positions) ++hist[x];
  Json h = Json::object();
  for (const auto& [x, count] : hist) h[std::to_string(x)] = count;
  body["histogram"] = h;
  return body;
}

void cmd_simulate(const Config& c, ArtifactSink& sink, std::ostream& log) {
  const AlphaLaw alpha = c.alpha();
  const std::uint64_t seed = c.seed();
  const std::int64_t n = required_count(c, "n", 0);
  const auto replicas = static_cast<std::size_t>(required_count(c, "replicas"));
  const std::string mode = c.word("mode", c.has("cooling") ? "rwcre" : "annealed");
  SimulationOptions options;
  options.workers = workers_of(c);
  options.record_leftmost = c.boolean("record_leftmost", false);
  options.record_increments = c.boolean("record_increments", false);

  TrajectoryBatch batch;
  if (mode == "rwre") {
    const std::int64_t start = c.integer("start", 0);
    const std::uint64_t env_seed = c.has("env_seed") ? static_cast<std::uint64_t>(c.integer("env_seed"))
                                                     : derive_seed(seed, kEnvTag, 0);
    EnvironmentWindow env(alpha, env_seed, std::min<std::int64_t>(0, start - n), std::max<std::int64_t>(0, start + n));
    batch = simulate_rwre(env, start, n, replicas, seed, options);
    if (c.boolean("dump_environment", false)) {
      std::ostringstream out;
      env.dump_csv(out);
      sink.write_text("environment.csv", out.str());
    }
  } else if (mode == "rwcre") {
    const auto map = c.cooling();
    if (!map) throw ConfigError("simulate mode rwcre needs a cooling map");
    batch = simulate_rwcre(alpha, *map, n, replicas, seed, options);
  } else if (mode == "annealed") {
    batch = simulate_rwre_annealed(alpha, n, replicas, seed, options);
  } else {
    throw ConfigError("mode must be rwre, rwcre or annealed, got '" + mode + "'");
  }

  Json body = batch_summary(batch);
  body["mode"] = mode;
  sink.write_json("summary.json", body);

  CsvTable hist({"position", "count"});
  for (const auto& [x, count] : body["histogram"].items()) hist.row().cell(std::string_view(x)).cell(count.get<std::uint64_t>());
  sink.write_csv("histogram.csv", hist);
  sink.write_positions("positions.bin", batch.final_positions);
  if (options.record_leftmost) {
    CsvTable t({"replica", "final", "leftmost"});
    for (std::size_t r = 0; r < batch.replicas(); ++r)
      t.row().cell(static_cast<std::uint64_t>(r)).cell(batch.final_positions[r]).cell(batch.leftmost[r]);
    sink.write_csv("leftmost.csv", t);
  }
  if (options.record_increments && batch.increments_per_replica > 0) {
    CsvTable t({"replica", "interval", "increment"});
    const std::size_t m = batch.increments_per_replica;
    for (std::size_t r = 0; r < batch.replicas(); ++r)
      for (std::size_t k = 0; k < m; ++k) {
        // The boundary increment is stored last and labelled interval 0.
        const std::uint64_t label = k + 1 == m ? 0 : k + 1;
        t.row().cell(static_cast<std::uint64_t>(r)).cell(label).cell(batch.increments[r * m + k]);
      }
    sink.write_csv("increments.csv", t);
  }
  log << mode << ": " << batch.replicas() << " replicas at n = " << n << "\n";
}

void cmd_limit_check(const Config& c, ArtifactSink& sink, std::ostream& log) {
  const AlphaLaw alpha = c.alpha();
  const std::uint64_t seed = c.seed();
  const std::int64_t n = required_count(c, "n", 2);
  const auto replicas = static_cast<std::size_t>(required_count(c, "replicas", 2));
  const auto map = c.cooling();
  const double slack = c.number("slack", 1.5);
  SimulationOptions options;
  options.workers = workers_of(c);
  const bool recurrent = classify(alpha) == Regime::recurrent;

  std::string reference = c.word("reference", "auto");
  std::optional<RegimePrediction> prediction;
  if (map && recurrent) {
    try {
      prediction = predict_scaling(*map, alpha);
    } catch (const DomainError&) {
    }
  }
  if (reference == "auto") {
    if (!map) reference = recurrent ? "kesten" : "normal";
    else if (map->finite_length() >= 1 && n <= map->increment(1)) reference = "rwre";
    else if (!recurrent) reference = "normal";
    else if (prediction && prediction->tag == RegimeTag::mixture) reference = "mixture";
    else if (prediction && prediction->tag == RegimeTag::pure_kesten) reference = "kesten";
    else reference = "normal";
  }

  const TrajectoryBatch batch = map ? simulate_rwcre(alpha, *map, n, replicas, seed, options)
                                    : simulate_rwre_annealed(alpha, n, replicas, seed, options);
  std::vector<double> x(batch.final_positions.begin(), batch.final_positions.end());
  const MomentsReport raw = moments_with_se(x);

  Json body;
  body["reference"] = reference;
  if (prediction) {
    body["prediction"] = {{"tag", std::string(to_string(prediction->tag))},
                          {"q", prediction->q},
                          {"n_exponent", prediction->n_exponent},
                          {"log_exponent", prediction->log_exponent},
                          {"prefactor", prediction->prefactor},
                          {"normalization", prediction->normalization},
                          {"law", prediction->law}};
  }
  double ks = 0.0;
  double critical = ks_critical_value(x.size(), slack);
  double predicted_variance = 1.0;
  std::vector<double> scaled;
  if (reference == "rwre") {
    const TrajectoryBatch ref =
        simulate_rwre_annealed(alpha, n, replicas, derive_seed(seed, kReferenceTag, 0), options);
    std::vector<double> y(ref.final_positions.begin(), ref.final_positions.end());
    ks = ks_distance(EmpiricalSample(x), EmpiricalSample(y));
    critical = ks_critical_value(x.size(), y.size(), slack);
    scaled = x;
    predicted_variance = moments_with_se(y).variance;
    body["normalization"] = "none (two-sample against annealed RWRE)";
  } else if (reference == "kesten" && !map) {
    const double ln = std::log(static_cast<double>(n));
    const double scale = log_rho_second_moment(alpha) * ln * ln;
    for (double v : x) scaled.push_back(v / scale);
    ks = ks_distance(EmpiricalSample(scaled), [](double t) { return kesten::cdf(t); });
    predicted_variance = kesten::variance();
    body["normalization"] = "Z_n / (sigma0^2 log^2 n)";
    // Scale-free companion: the standardized sample against V / sigma_V.
    std::vector<double> standardized;
    for (double v : x) standardized.push_back((v - raw.mean) / std::sqrt(raw.variance));
    const double sv = kesten::sigma();
    body["ks_standardized"] =
        ks_distance(EmpiricalSample(standardized), [sv](double t) { return kesten::cdf(t * sv); });
  } else {
    if (raw.degenerate) throw DomainError("sample variance is zero; nothing to standardize");
    const double sd = std::sqrt(raw.variance);
    for (double v : x) scaled.push_back((v - raw.mean) / sd);
    body["normalization"] = "(X_n - mean) / sd";
    if (reference == "normal") {
      ks = ks_distance(EmpiricalSample(scaled), [](double t) { return normal_cdf(t); });
    } else if (reference == "kesten") {
      const double sv = kesten::sigma();
      ks = ks_distance(EmpiricalSample(scaled), [sv](double t) { return kesten::cdf(t * sv); });
    } else if (reference == "mixture") {
      const double q = c.has("q") ? c.number("q") : (prediction ? prediction->q : 0.0);
      if (!(q > 0.0)) throw ConfigError("mixture reference needs q (or a doubleexp cooling map)");
      const DensityGrid grid = MixtureLaw(lambda_q(q), true).density_on_grid();
      ks = ks_distance(EmpiricalSample(scaled), [&grid](double t) { return grid.cdf_at(t); });
      body["q"] = q;
    } else {
      throw ConfigError("reference must be auto, kesten, normal, mixture or rwre, got '" + reference + "'");
    }
  }
  if (c.has("centering_speed") && c.boolean("centering_speed", false)) {
    // Centered by v n instead of the sample mean.
    const double v = speed(alpha).speed;
    std::vector<double> centered;
    const double sd = std::sqrt(raw.variance);
    for (double t : x) centered.push_back((t - v * static_cast<double>(n)) / sd);
    body["ks_speed_centered"] = ks_distance(EmpiricalSample(centered), [](double t) { return normal_cdf(t); });
  }
  const MomentsReport m = moments_with_se(scaled);
  body["ks"] = ks;
  body["critical_value"] = critical;
  body["pass"] = ks <= critical;
  body["raw_moments"] = moments_json(raw);
  body["scaled_moments"] = moments_json(m);
  body["predicted_variance"] = predicted_variance;
  sink.write_json("limit_check.json", body);

  CsvTable t({"statistic", "empirical", "standard_error", "predicted"});
  t.row().cell("mean").cell(m.mean).cell(m.mean_se).cell(reference == "rwre" ? std::nan("") : 0.0);
  t.row().cell("variance").cell(m.variance).cell(m.variance_se).cell(predicted_variance);
  t.row().cell("skew").cell(m.skew).cell(m.skew_se).cell(0.0);
  sink.write_csv("moments.csv", t);
  log << "reference " << reference << ": KS " << format_number(ks) << " vs critical " << format_number(critical)
      << "\n";
}

VarianceBudget budget_of(const Config& c) {
  VarianceBudget b;
  b.dp_cap = positive(c, "dp_cap", b.dp_cap);
  b.dp_env_samples = static_cast<std::size_t>(positive(c, "dp_env_samples", static_cast<std::int64_t>(b.dp_env_samples), 2));
  b.mc_step_budget = c.number("mc_step_budget", b.mc_step_budget);
  b.min_replicas = static_cast<std::size_t>(positive(c, "min_replicas", static_cast<std::int64_t>(b.min_replicas), 2));
  b.max_replicas = static_cast<std::size_t>(positive(c, "max_replicas", static_cast<std::int64_t>(b.max_replicas), 2));
  b.workers = workers_of(c);
  return b;
}

void cmd_regime(const Config& c, ArtifactSink& sink, std::ostream& log) {
  const AlphaLaw alpha = c.alpha();
  const auto map = c.cooling();
  if (!map) throw ConfigError("regime needs a cooling map");
  const std::int64_t horizon = required_count(c, "horizon", 3);
  const RegimeClassification r = classify_regime(alpha, *map, horizon, budget_of(c), c.seed());

  CsvTable t({"interval", "length", "log_length", "variance", "variance_se", "method", "lambda"});
  for (std::size_t k = 0; k < r.lambdas.size(); ++k) {
    const VarianceEstimate& e = r.variances.estimates[k];
    t.row().cell(e.interval).cell(e.length).cell(e.log_length).cell(e.variance).cell(e.variance_se)
        .cell(to_string(e.method)).cell(r.lambdas[k]);
  }
  sink.write_csv("lambdas.csv", t);

  Json body;
  body["tag"] = std::string(to_string(r.tag));
  body["q_hat"] = r.q_hat;
  body["q_se"] = r.q_se;
  body["relative_drift"] = r.relative_drift;
  body["trend"] = trend_json(r.trend);
  body["warnings"] = r.variances.warnings;
  try {
    const RegimePrediction p = predict_scaling(*map, alpha);
    body["prediction"] = {{"tag", std::string(to_string(p.tag))}, {"q", p.q},
                          {"prefactor", p.prefactor},            {"normalization", p.normalization},
                          {"law", p.law}};
  } catch (const DomainError&) {
    body["prediction"] = nullptr;
  }
  sink.write_json("regime.json", body);
  log << "verdict " << to_string(r.tag) << " (q_hat " << format_number(r.q_hat) << ")\n";
}

void cmd_scan_mean(const Config& c, ArtifactSink& sink, std::ostream& log) {
  const std::string family = c.word("family", "recurrent");
  double s = 0.0;
  if (family == "s_transient") s = c.number("s");
  else if (family != "recurrent") throw ConfigError("family must be recurrent or s_transient");
  const std::function<AlphaLaw(double)> make = [&](double x) {
    return family == "recurrent" ? AlphaLaw::recurrent_family(x) : AlphaLaw::s_transient_family(x, s);
  };
  const std::vector<double> xs = c.numbers("x_grid");
  const std::vector<std::int64_t> ns = c.integers("n_grid");
  for (double x : xs)
    if (!(x > 0.0 && x < 1.0)) throw ConfigError("x_grid values must lie in (0, 1)");
  const auto env_samples = static_cast<std::size_t>(required_count(c, "env_samples", 2));
  const MeanSignScan scan = scan_mean_sign(make, xs, ns, env_samples, c.seed(),
                                           c.boolean("subtract_speed", family != "recurrent"),
                                           c.number("margin", 5.0), workers_of(c));
  CsvTable t({"x", "n", "estimate", "standard_error", "verdict"});
  for (const MeanSignRow& r : scan.rows)
    t.row().cell(r.x).cell(r.n).cell(r.estimate).cell(r.standard_error).cell(to_string(r.verdict));
  sink.write_csv("scan_mean.csv", t);
  CsvTable counts({"x", "positive", "negative"});
  for (std::size_t i = 0; i < xs.size(); ++i)
    counts.row().cell(xs[i]).cell(static_cast<std::uint64_t>(scan.positive_counts[i]))
        .cell(static_cast<std::uint64_t>(scan.negative_counts[i]));
  sink.write_csv("scan_counts.csv", counts);
  log << scan.rows.size() << " cells scanned\n";
}

void cmd_mean_decay(const Config& c, ArtifactSink& sink, std::ostream& log) {
  const AlphaLaw alpha = c.alpha();
  const MeanDecayReport r =
      check_mean_decay(alpha, c.integers("n_grid"), c.number("gamma", 0.6),
                       static_cast<std::size_t>(required_count(c, "env_samples", 2)), c.seed(), workers_of(c));
  CsvTable t({"n", "estimate", "standard_error", "ratio"});
  for (const MeanDecayRow& row : r.rows) t.row().cell(row.n).cell(row.estimate).cell(row.standard_error).cell(row.ratio);
  sink.write_csv("mean_decay.csv", t);
  Json body;
  body["gamma"] = r.gamma;
  body["fitted_c"] = r.fitted_c;
  body["trend"] = trend_json(r.trend);
  body["upward_trend"] = r.upward_trend;
  sink.write_json("mean_decay.json", body);
  log << "fitted C " << format_number(r.fitted_c) << ", upward trend " << (r.upward_trend ? "yes" : "no") << "\n";
}

void cmd_break_recurrence(const Config& c, ArtifactSink& sink, std::ostream& log) {
  const AlphaLaw alpha = c.alpha();
  const std::uint64_t seed = c.seed();
  const auto env_samples = static_cast<std::size_t>(required_count(c, "env_samples", 2));
  const std::size_t workers = workers_of(c);
  BreakerOptions options;
  options.margin = c.number("margin", options.margin);
  options.max_blocks = static_cast<std::size_t>(positive(c, "max_blocks", static_cast<std::int64_t>(options.max_blocks)));
  options.last_count = positive(c, "last_count", options.last_count);
  options.max_total_time = positive(c, "max_total_time", options.max_total_time);
  const MeanOracle oracle = [&](std::int64_t n) {
    return annealed_mean(alpha, n, env_samples, derive_seed(seed, static_cast<std::uint64_t>(n), kEnvTag), workers);
  };
  const RecurrenceBreaker breaker = build_recurrence_breaker(alpha, oracle, c.integers("n_grid"), options);

  const auto replicas = static_cast<std::size_t>(required_count(c, "replicas", 2));
  const std::int64_t intervals = breaker.map.finite_length();
  const std::int64_t total = breaker.map.tau(intervals);
  SimulationOptions sim;
  sim.workers = workers;
  for (std::int64_t end = 0; const BreakerBlock& b : breaker.blocks) sim.checkpoints.push_back(end += b.count * b.length);
  const TrajectoryBatch batch = simulate_rwcre(alpha, breaker.map, total, replicas, seed, sim);

  const std::size_t m = batch.checkpoints_per_replica;
  CsvTable t({"block", "length", "count", "time", "mean", "standard_error", "ci99_low", "ci99_high"});
  Json ends = Json::array();
  std::vector<double> running(replicas, 0.0);
  std::int64_t time = 0;
  double previous_mean = -HUGE_VAL;
  bool grows = true;
  bool positive_ci = true;
  for (std::size_t j = 0; j < breaker.blocks.size(); ++j) {
    const BreakerBlock& b = breaker.blocks[j];
    for (std::size_t r = 0; r < replicas; ++r) running[r] = static_cast<double>(batch.checkpoint_positions[r * m + j]);
    time += b.count * b.length;
    const MomentsReport mr = moments_with_se(running);
    const double lo = mr.mean - 2.5758293035489 * mr.mean_se;
    const double hi = mr.mean + 2.5758293035489 * mr.mean_se;
    grows = grows && mr.mean > previous_mean;
    positive_ci = positive_ci && lo > 0.0;
    previous_mean = mr.mean;
    t.row().cell(static_cast<std::uint64_t>(j + 1)).cell(b.length).cell(b.count).cell(time).cell(mr.mean)
        .cell(mr.mean_se).cell(lo).cell(hi);
    ends.push_back({{"block", j + 1}, {"time", time}, {"mean", mr.mean}, {"standard_error", mr.mean_se}});
  }
  sink.write_csv("block_ends.csv", t);

  Json body;
  body["cooling"] = breaker.map.describe();
  Json provenance = Json::array();
  for (const BreakerBlock& b : breaker.blocks)
    provenance.push_back({{"length", b.length}, {"count", b.count}, {"mean", b.mean.estimate},
                          {"standard_error", b.mean.standard_error}});
  body["blocks"] = provenance;
  body["rejected_lengths"] = breaker.rejected_lengths;
  body["block_ends"] = ends;
  body["final_mean_ci99_positive"] = positive_ci;
  body["grows_across_blocks"] = grows;
  sink.write_json("breaker.json", body);
  log << "map " << breaker.map.describe() << "; block-end means grow: " << (grows ? "yes" : "no") << "\n";
}

void cmd_valley(const Config& c, ArtifactSink& sink, std::ostream& log) {
  const AlphaLaw alpha = c.alpha();
  if (classify(alpha) != Regime::recurrent) throw ConfigError("valley needs a recurrent alpha");
  const std::uint64_t seed = c.seed();
  const std::int64_t n = required_count(c, "n", 3);
  const auto environments = static_cast<std::size_t>(required_count(c, "environments", 2));
  const double ln = std::log(static_cast<double>(n));
  const double depth = c.number("depth", ln);
  const double delta = c.number("delta", 0.0);
  const double scale = log_rho_second_moment(alpha) * ln * ln;

  struct Row {
    std::int64_t z = 0;
    std::optional<Valley> valley;
  };
  std::vector<Row> rows(environments);
  parallel_for(environments, workers_of(c), [&](std::size_t i) {
    EnvironmentWindow env(alpha, derive_seed(seed, i, 0), -n, n);
    SimulationOptions one;
    one.workers = 1;
    rows[i].z = simulate_rwre(env, 0, n, 1, derive_seed(seed, i, 1), one).final_positions.front();
    rows[i].valley = smallest_valley(potential(env), depth, delta);
  });

  CsvTable t({"environment", "z", "scaled_z", "a", "b", "c", "depth", "scaled_b"});
  std::vector<double> zs, bs;
  std::size_t exhausted = 0;
  for (std::size_t i = 0; i < environments; ++i) {
    const Row& r = rows[i];
    t.row().cell(static_cast<std::uint64_t>(i)).cell(r.z).cell(static_cast<double>(r.z) / scale);
    if (r.valley) {
      t.cell(r.valley->a).cell(r.valley->b).cell(r.valley->c).cell(r.valley->depth)
          .cell(static_cast<double>(r.valley->b) / scale);
      zs.push_back(static_cast<double>(r.z) / scale);
      bs.push_back(static_cast<double>(r.valley->b) / scale);
    } else {
      ++exhausted;
      t.cell("").cell("").cell("").cell("").cell("");
    }
  }
  sink.write_csv("valley.csv", t);
  Json body;
  body["depth_threshold"] = depth;
  body["delta"] = delta;
  body["scale"] = scale;
  body["environments"] = environments;
  body["window_exhausted"] = exhausted;
  const double rho = zs.size() >= 2 ? correlation(zs, bs) : std::nan("");
  body["correlation"] = nullable(rho);
  sink.write_json("valley.json", body);
  log << "corr(Z_n, b) = " << format_number(rho) << " over " << zs.size() << " environments\n";
}

void cmd_hit_check(const Config& c, ArtifactSink& sink, std::ostream& log) {
  const AlphaLaw alpha = c.alpha();
  const std::uint64_t seed = c.seed();
  const auto environments = static_cast<std::size_t>(required_count(c, "environments"));
  const std::int64_t max_width = required_count(c, "max_width", 2);
  const auto replicas = static_cast<std::size_t>(c.integer("replicas", 0));
  const std::size_t workers = workers_of(c);

  CsvTable t({"environment", "a", "x", "b", "hit_formula", "hit_oracle", "hit_abs_diff", "hit_mc", "hit_mc_se",
              "time_formula", "time_oracle", "time_rel_diff"});
  double max_hit = 0.0;
  double max_time = 0.0;
  std::size_t within = 0;
  for (std::size_t i = 0; i < environments; ++i) {
    SplitMix64 geo(derive_seed(seed, i, kGeometryTag));
    const std::int64_t width = 2 + static_cast<std::int64_t>(geo.next() % static_cast<std::uint64_t>(max_width - 1));
    const std::int64_t a = -1 - static_cast<std::int64_t>(geo.next() % static_cast<std::uint64_t>(width - 1));
    const std::int64_t b = a + width;
    const std::int64_t x = a + 1 + static_cast<std::int64_t>(geo.next() % static_cast<std::uint64_t>(width - 1));
    const EnvironmentWindow env(alpha, derive_seed(seed, i, 0), std::min<std::int64_t>(a, 0), std::max<std::int64_t>(b, 0));
    const double formula = hit_prob(env, x, a, b);
    const double oracle = hit_prob_linear_solve(env, x, a, b);
    const double tf = expected_hit_time_reflected(env, a, b, x);
    const double to = expected_hit_time_linear_solve(env, a, b, x);
    const double hit_diff = std::abs(formula - oracle);
    const double time_diff = std::abs(tf - to) / std::max(1.0, std::abs(to));
    max_hit = std::max(max_hit, hit_diff);
    max_time = std::max(max_time, time_diff);
    t.row().cell(static_cast<std::uint64_t>(i)).cell(a).cell(x).cell(b).cell(formula).cell(oracle).cell(hit_diff);
    if (replicas >= 2) {
      const MeanEstimate mc = hit_prob_monte_carlo(env, x, a, b, replicas, derive_seed(seed, i, 1), workers);
      const double se = std::sqrt(formula * (1.0 - formula) / static_cast<double>(replicas));
      if (std::abs(mc.estimate - formula) <= 3.0 * se || se == 0.0) ++within;
      t.cell(mc.estimate).cell(mc.standard_error);
    } else {
      t.cell("").cell("");
    }
    t.cell(tf).cell(to).cell(time_diff);
  }
  sink.write_csv("hit_check.csv", t);
  Json body;
  body["environments"] = environments;
  body["max_hit_abs_diff"] = max_hit;
  body["max_time_rel_diff"] = max_time;
  if (replicas >= 2) body["mc_within_3se_fraction"] = static_cast<double>(within) / static_cast<double>(environments);
  sink.write_json("hit_check.json", body);
  log << "max |formula - oracle| = " << format_number(max_hit) << "\n";
}

using Handler = void (*)(const Config&, ArtifactSink&, std::ostream&);

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> table{
      {"classify", cmd_classify},       {"kesten-table", cmd_kesten_table},
      {"simulate", cmd_simulate},       {"limit-check", cmd_limit_check},
      {"regime", cmd_regime},           {"scan-mean", cmd_scan_mean},
      {"mean-decay", cmd_mean_decay},   {"break-recurrence", cmd_break_recurrence},
      {"valley", cmd_valley},           {"hit-check", cmd_hit_check}};
  return table;
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, _] : handlers()) v.push_back(name);
    return v;
  }();
  return names;
}

void run_subcommand(std::string_view name, Config& config, const std::filesystem::path& out, std::ostream& log) {
  for (const auto& [n, handler] : handlers()) {
    if (n != name) continue;
    config.set_section(n);
    ArtifactSink sink(out, n, config.resolved());
    handler(config, sink, log);
    sink.finish();
    return;
  }
  throw ConfigError("unknown subcommand '" + std::string(name) + "'");
}

}  // namespace cw::cli
