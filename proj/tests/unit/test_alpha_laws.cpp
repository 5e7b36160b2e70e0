#include <doctest.h>

#include <cmath>

#include "cw/alpha_law.hpp"
#include "cw/error.hpp"
#include "cw/stats.hpp"

using namespace cw;

namespace {

double brute_rho_moment(const AlphaLaw& a, double s) {
  double m = 0.0;
  for (const Atom& at : a.atoms()) m += at.weight * std::pow((1.0 - at.omega) / at.omega, s);
  return m;
}

AlphaLaw random_law(SplitMix64& rng) {
  const int atoms = 1 + static_cast<int>(rng.next() % 4);
  std::vector<Atom> v;
  double total = 0.0;
  for (int i = 0; i < atoms; ++i) {
    const double w = 0.1 + rng.uniform();
    v.push_back({0.05 + 0.9 * rng.uniform(), w});
    total += w;
  }
  for (Atom& a : v) a.weight /= total;
  return AlphaLaw(v);
}

}  // namespace

TEST_SUITE("alpha_laws") {
  TEST_CASE("validation") {
    CHECK_THROWS_AS(AlphaLaw({{0.5, 0.5}}), DomainError);
    CHECK_THROWS_AS(AlphaLaw({{1.0, 1.0}}), DomainError);
    CHECK_THROWS_AS(AlphaLaw({{0.3, -0.5}, {0.6, 1.5}}), DomainError);
    const AlphaLaw a({{0.3, 0.5}, {0.6, 0.5}});
    CHECK(a.non_degenerate());
    CHECK(a.ellipticity() == doctest::Approx(0.3));
    CHECK_FALSE(AlphaLaw({{0.75, 1.0}}).non_degenerate());
  }

  TEST_CASE("rho_moment examples") {
    const AlphaLaw a({{2.0 / 3.0, 8.0 / 9.0}, {1.0 / 3.0, 1.0 / 9.0}});
    CHECK(rho_moment(a, 3.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rho_moment(a, 0.0) == 1.0);
    CHECK(rho_moment(AlphaLaw({{0.75, 1.0}}), 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }

  TEST_CASE("rho_moment equals the brute-force weighted sum") {
    SplitMix64 rng(11);
    for (int i = 0; i < 200; ++i) {
      const AlphaLaw a = random_law(rng);
      const double s = -3.0 + 6.0 * rng.uniform();
      const double brute = brute_rho_moment(a, s);
      CHECK(std::abs(rho_moment(a, s) - brute) <= 1e-14 * std::max(1.0, brute));
    }
  }

  TEST_CASE("classify examples") {
    CHECK(classify(AlphaLaw({{1.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}})) == Regime::recurrent);
    CHECK(classify(AlphaLaw({{0.75, 1.0}})) == Regime::right_transient);
    CHECK(classify(AlphaLaw({{2.0 / 3.0, 0.75}, {1.0 / 3.0, 0.25}})) == Regime::right_transient);
    CHECK(log_rho_mean(AlphaLaw({{2.0 / 3.0, 0.75}, {1.0 / 3.0, 0.25}})) ==
          doctest::Approx(-0.5 * std::log(2.0)));
    CHECK(classify(AlphaLaw({{0.25, 1.0}})) == Regime::left_transient);
  }

  TEST_CASE("speed examples") {
    CHECK(speed(AlphaLaw({{0.75, 1.0}})).speed == doctest::Approx(0.5));
    const SpeedReport z = speed(AlphaLaw({{0.7, 0.8}, {0.15, 0.2}}));
    CHECK(z.speed == 0.0);
    CHECK(z.zero_speed_transient);
    CHECK(z.regime == Regime::right_transient);
    CHECK(speed(AlphaLaw({{2.0 / 3.0, 8.0 / 9.0}, {1.0 / 3.0, 1.0 / 9.0}})).speed == doctest::Approx(0.2));
    const SpeedReport r = speed(AlphaLaw({{1.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}}));
    CHECK(r.speed == 0.0);
    CHECK(r.regime == Regime::recurrent);
  }

  TEST_CASE("zero-speed example moments") {
    const AlphaLaw a({{0.7, 0.8}, {0.15, 0.2}});
    CHECK(rho_moment(a, 1.0) == doctest::Approx(1.476).epsilon(1e-3));
    CHECK(log_rho_mean(a) == doctest::Approx(-0.331).epsilon(2e-3));
  }

  TEST_CASE("solve_eta_recurrent examples") {
    CHECK(solve_eta_recurrent(0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(solve_eta_recurrent(2.0 / 3.0) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(solve_eta_recurrent(0.2) == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(solve_eta_recurrent(0.0), DomainError);
  }

  TEST_CASE("solve_eta_s_transient examples") {
    CHECK(solve_eta_s_transient(0.5, 2.7) == doctest::Approx(0.5).epsilon(1e-12));
    const double r3 = std::cbrt(35.0 / 9.0);
    CHECK(solve_eta_s_transient(0.75, 3.0) == doctest::Approx(1.0 / (1.0 + r3)).epsilon(1e-12));
    CHECK(solve_eta_s_transient(0.75, 3.0) == doctest::Approx(0.38866).epsilon(1e-4));
    CHECK(solve_eta_s_transient(0.8, 2.0) == doctest::Approx(1.0 / (1.0 + std::sqrt(4.75))).epsilon(1e-12));
    CHECK(solve_eta_s_transient(0.8, 2.0) == doctest::Approx(0.31452).epsilon(1e-4));
    CHECK_THROWS_AS(solve_eta_s_transient(0.2, 2.0), NoRootError);
  }

  TEST_CASE("s-transient family hits its moment equation") {
    for (double x : {0.55, 0.6, 0.75, 0.9})
      for (double s : {0.5, 1.0, 2.0, 3.0}) {
        const AlphaLaw a = AlphaLaw::s_transient_family(x, s);
        CHECK(rho_moment(a, s) == doctest::Approx(1.0).epsilon(1e-10));
      }
  }

  TEST_CASE("transience_index examples") {
    CHECK(*transience_index(AlphaLaw({{2.0 / 3.0, 8.0 / 9.0}, {1.0 / 3.0, 1.0 / 9.0}})) ==
          doctest::Approx(3.0).epsilon(1e-10));
    CHECK(*transience_index(AlphaLaw({{2.0 / 3.0, 0.75}, {1.0 / 3.0, 0.25}})) ==
          doctest::Approx(std::log2(3.0)).epsilon(1e-10));
    CHECK_FALSE(transience_index(AlphaLaw({{1.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}})).has_value());
    CHECK(std::isinf(*transience_index(AlphaLaw({{0.75, 1.0}}))));
  }

  TEST_CASE("recurrent family classifies recurrent on a grid of 100 x") {
    for (int i = 1; i <= 100; ++i) {
      const double x = 0.01 + 0.98 * (i - 1) / 99.0;
      CHECK(classify(AlphaLaw::recurrent_family(x)) == Regime::recurrent);
    }
  }

  TEST_CASE("s-transient solver composed with transience_index recovers s") {
    for (double x : {0.6, 0.7, 0.8, 0.9})
      for (double s : {0.5, 1.5, 2.5, 4.0}) {
        const auto idx = transience_index(AlphaLaw::s_transient_family(x, s));
        REQUIRE(idx.has_value());
        CHECK(*idx == doctest::Approx(s).epsilon(1e-8));
      }
  }

  TEST_CASE("reflection swaps the regime and negates the speed") {
    SplitMix64 rng(3);
    for (int i = 0; i < 100; ++i) {
      const AlphaLaw a = random_law(rng);
      const AlphaLaw r = a.reflected();
      const Regime ra = classify(a), rr = classify(r);
      if (ra == Regime::recurrent) CHECK(rr == Regime::recurrent);
      if (ra == Regime::right_transient) CHECK(rr == Regime::left_transient);
      if (ra == Regime::left_transient) CHECK(rr == Regime::right_transient);
      CHECK(speed(r).speed == doctest::Approx(-speed(a).speed).epsilon(1e-12));
      CHECK(log_rho_second_moment(r) == doctest::Approx(log_rho_second_moment(a)).epsilon(1e-12));
    }
  }

  TEST_CASE("moment report invariants") {
    SplitMix64 rng(19);
    for (int i = 0; i < 100; ++i) {
      const MomentReport m = moment_report(random_law(rng));
      CHECK(m.sigma0_sq >= m.log_rho_mean * m.log_rho_mean - 1e-15);
    }
  }

  TEST_CASE("serialization round trip through to_string") {
    const AlphaLaw a({{1.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}});
    CHECK(a.to_string().rfind("atoms=[(", 0) == 0);
    CHECK(a.symmetric());
    CHECK_FALSE(AlphaLaw::recurrent_family(2.0 / 3.0).symmetric());
  }
}
