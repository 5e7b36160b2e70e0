#include <doctest.h>

#include <cstring>
#include <vector>

#include "cw/kernels/dp_kernels.hpp"
#include "cw/stats.hpp"

using namespace cw;

namespace {

std::vector<double> random_vector(SplitMix64& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform();
  return v;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("active isa is one of the compiled variants") {
    const auto isa = kernels::active_isa();
    CHECK((isa == "scalar" || isa == "avx2"));
    if (!kernels::avx2_available()) CHECK(isa == "scalar");
  }

  TEST_CASE("scalar dp step matches the recurrence") {
    const std::vector<double> p{0.0, 0.25, 0.5, 0.25, 0.0};
    const std::vector<double> up{0.6, 0.6, 0.6, 0.6, 0.6};
    const std::vector<double> down{0.4, 0.4, 0.4, 0.4, 0.4};
    std::vector<double> q(5, -1.0);
    kernels::dp_step_scalar(p.data(), up.data(), down.data(), q.data(), 1, 4);
    CHECK(q[1] == doctest::Approx(0.5 * 0.4));
    CHECK(q[2] == doctest::Approx(0.25 * 0.6 + 0.25 * 0.4));
    CHECK(q[3] == doctest::Approx(0.5 * 0.6));
    CHECK(q[0] == -1.0);
    CHECK(q[4] == -1.0);
    double m[3];
    kernels::moments_scalar(p.data(), -2.0, 0, 5, m);
    CHECK(m[0] == doctest::Approx(1.0));
    CHECK(m[1] == doctest::Approx(0.0));
    CHECK(m[2] == doctest::Approx(0.5));
  }

#if defined(CW_HAVE_AVX2_KERNELS)
  TEST_CASE("avx2 variants are bit-identical to the scalar reference") {
    if (!kernels::avx2_available()) return;
    SplitMix64 rng(31);
    for (std::size_t n : {3u, 4u, 5u, 7u, 8u, 9u, 17u, 64u, 101u, 1000u, 4099u}) {
      const auto p = random_vector(rng, n), up = random_vector(rng, n), down = random_vector(rng, n);
      for (std::size_t first : {std::size_t{1}, std::size_t{2}, n / 3 + 1}) {
        const std::size_t last = n - 1;
        if (first >= last) continue;
        std::vector<double> a(n, 0.0), b(n, 0.0);
        kernels::dp_step_scalar(p.data(), up.data(), down.data(), a.data(), first, last);
        kernels::dp_step_avx2(p.data(), up.data(), down.data(), b.data(), first, last);
        CHECK(std::memcmp(a.data(), b.data(), n * sizeof(double)) == 0);
        double ma[3], mb[3];
        const double origin = -static_cast<double>(n / 2);
        kernels::moments_scalar(p.data(), origin, first, last, ma);
        kernels::moments_avx2(p.data(), origin, first, last, mb);
        CHECK(std::memcmp(ma, mb, sizeof ma) == 0);
      }
    }
  }
#endif
}
