#include <doctest.h>

#include <cmath>
#include <optional>
#include <sstream>

#include "cw/alpha_law.hpp"
#include "cw/environment.hpp"
#include "cw/error.hpp"
#include "cw/stats.hpp"

using namespace cw;

namespace {

// Exhaustive O(n^2) search over (a, c) with the same selection rules.
std::optional<Valley> brute_valley(const PotentialPath& p, double need) {
  std::optional<Valley> best;
  for (std::int64_t a = p.lo(); a <= 0; ++a)
    for (std::int64_t c = 0; c <= p.hi(); ++c) {
      std::int64_t b = a;
      for (std::int64_t k = a; k <= c; ++k)
        if (p(k) < p(b)) b = k;
      bool ok = true;
      for (std::int64_t k = a; k <= b; ++k) ok = ok && p(k) <= p(a);
      for (std::int64_t k = b; k <= c; ++k) ok = ok && p(k) <= p(c);
      const double depth = std::min(p(a), p(c)) - p(b);
      if (!ok || !(depth > need)) continue;
      if (!best || c - a < best->c - best->a || (c - a == best->c - best->a && c < best->c))
        best = Valley{a, b, c, depth};
    }
  return best;
}

}  // namespace

TEST_SUITE("environment") {
  TEST_CASE("degenerate law gives a constant window") {
    const EnvironmentWindow w = sample_window(AlphaLaw({{0.75, 1.0}}), 99, -5, 5);
    for (std::int64_t x = -5; x <= 5; ++x) CHECK(w.omega(x) == 0.75);
    CHECK_THROWS_AS(w.omega(6), DomainError);
    CHECK_THROWS_AS(sample_window(AlphaLaw({{0.75, 1.0}}), 1, 1, 5), DomainError);
  }

  TEST_CASE("site-keyed values agree across window shapes and extensions") {
    const AlphaLaw a({{0.2, 0.3}, {0.5, 0.3}, {0.8, 0.4}});
    const EnvironmentWindow small = sample_window(a, 42, 0, 10);
    EnvironmentWindow big = sample_window(a, 42, -3, 20);
    CHECK(small.omega(5) == big.omega(5));
    for (std::int64_t x = 0; x <= 10; ++x) CHECK(small.omega(x) == big.omega(x));
    const double before = big.omega(-3);
    big.extend(-100, 100);
    CHECK(big.omega(-3) == before);
    CHECK(big.covers(-100, 100));
    const SiteField field(a, 42);
    CHECK(field.omega(77) == big.omega(77));
    EnvironmentWindow explicit_w(-1, {0.9, 0.7, 0.4});
    CHECK_THROWS_AS(explicit_w.extend(-2, 2), DomainError);
  }

  TEST_CASE("atom frequencies over 10^6 sites") {
    const AlphaLaw a({{0.3, 0.25}, {0.7, 0.75}});
    const SiteField f(a, 7);
    std::size_t count = 0;
    const std::size_t n = 1000000;
    for (std::int64_t x = 0; x < static_cast<std::int64_t>(n); ++x) count += f.omega(x) == 0.3;
    const double sd = std::sqrt(0.25 * 0.75 / n);
    CHECK(std::abs(static_cast<double>(count) / n - 0.25) < 4.0 * sd);
  }

  TEST_CASE("potential examples") {
    const PotentialPath h = potential(sample_window(AlphaLaw({{0.75, 1.0}}), 1, -4, 4));
    for (std::int64_t k = -4; k <= 4; ++k) CHECK(h(k) == doctest::Approx(k * std::log(1.0 / 3.0)));
    CHECK(h(0) == 0.0);
    const PotentialPath p = potential(EnvironmentWindow(-1, {0.5, 0.5, 0.7, 0.4}));
    CHECK(p(2) == doctest::Approx(std::log(3.0 / 7.0) + std::log(1.5)));
  }

  TEST_CASE("potential increments equal log rho site by site") {
    const AlphaLaw a({{0.3, 0.5}, {0.65, 0.5}});
    const EnvironmentWindow w = sample_window(a, 3, -50, 50);
    const PotentialPath p = potential(w);
    CHECK(p(0) == 0.0);
    for (std::int64_t k = -49; k <= 50; ++k) CHECK(p(k) - p(k - 1) == doctest::Approx(std::log(rho(w.omega(k)))).epsilon(1e-12));
  }

  TEST_CASE("valley examples") {
    SUBCASE("strictly monotone path is exhausted") {
      const PotentialPath p(-5, {5, 4, 3, 2, 1, 0, -1, -2, -3});
      CHECK_FALSE(smallest_valley(p, 0.5).has_value());
    }
    SUBCASE("V shape") {
      const PotentialPath p(-3, {3, 2, 1, 0, 1, 2, 3});
      const auto v = smallest_valley(p, 1.0);
      REQUIRE(v.has_value());
      CHECK(v->a == -2);
      CHECK(v->b == 0);
      CHECK(v->c == 2);
      CHECK(v->depth == 2.0);
      const auto d = smallest_valley(p, 1.0, 1.0);
      REQUIRE(d.has_value());
      CHECK(d->c - d->a == 6);
    }
  }

  TEST_CASE("valley equals the brute-force oracle on random paths") {
    SplitMix64 rng(2718);
    for (int rep = 0; rep < 500; ++rep) {
      const std::int64_t lo = -static_cast<std::int64_t>(rng.next() % 50);
      std::vector<double> u(50);
      double acc = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        acc += rng.uniform() < 0.5 ? std::log(2.0) : -std::log(2.0);
        u[i] = acc;
      }
      const double shift = u[static_cast<std::size_t>(-lo)];
      for (double& x : u) x -= shift;
      const PotentialPath p(lo, u);
      const double need = 0.5 + 2.0 * rng.uniform();
      const auto fast = smallest_valley(p, need);
      const auto slow = brute_valley(p, need);
      REQUIRE(fast.has_value() == slow.has_value());
      if (fast) {
        CHECK(fast->a == slow->a);
        CHECK(fast->b == slow->b);
        CHECK(fast->c == slow->c);
        CHECK(fast->depth == doctest::Approx(slow->depth));
      }
    }
  }

  TEST_CASE("annealed sigma series examples") {
    CHECK(sigma_series_annealed(AlphaLaw({{0.75, 1.0}})) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(sigma_series_annealed(AlphaLaw({{2.0 / 3.0, 8.0 / 9.0}, {1.0 / 3.0, 1.0 / 9.0}})) ==
          doctest::Approx(5.0).epsilon(1e-14));
    CHECK_THROWS_AS(sigma_series_annealed(AlphaLaw({{0.7, 0.8}, {0.15, 0.2}})), DivergentSeriesError);
  }

  TEST_CASE("annealed sigma times speed is one") {
    SplitMix64 rng(8);
    for (int i = 0; i < 100; ++i) {
      const double x = 0.55 + 0.4 * rng.uniform();
      const double s = 1.05 + 3.0 * rng.uniform();
      const AlphaLaw a = AlphaLaw::s_transient_family(x, s);
      if (rho_moment(a, 1.0) >= 1.0) continue;
      CHECK(std::abs(sigma_series_annealed(a) * speed(a).speed - 1.0) < 1e-12);
    }
  }

  TEST_CASE("quenched sigma series") {
    const SigmaSeriesResult h = sigma_series_quenched(SiteField(AlphaLaw({{0.75, 1.0}}), 1));
    CHECK(h.value == doctest::Approx(2.0).epsilon(1e-11));
    CHECK(h.tail_bound < 1e-11);
    // The quenched series averages to the annealed value.
    const AlphaLaw a({{0.8, 0.5}, {0.6, 0.5}});
    MomentAccumulator acc;
    for (std::uint64_t s = 0; s < 4000; ++s) acc.add(sigma_series_quenched(SiteField(a, s)).value);
    CHECK(std::abs(acc.mean() - sigma_series_annealed(a)) < 4.0 * std::sqrt(acc.variance() / 4000.0));
    CHECK_THROWS_AS(sigma_series_quenched(SiteField(AlphaLaw({{0.4, 1.0}}), 1), 1e-12, 1000),
                    DivergentSeriesError);
  }

  TEST_CASE("environment dump format") {
    std::ostringstream out;
    EnvironmentWindow(-1, {0.25, 0.5}).dump_csv(out);
    CHECK(out.str() == "x,omega\n-1,0.25\n0,0.5\n");
  }
}
