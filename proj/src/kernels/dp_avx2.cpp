#include <immintrin.h>

#include "cw/kernels/dp_kernels.hpp"

namespace cw::kernels {

void dp_step_avx2(const double* p, const double* up, const double* down, double* q,
                  std::size_t first, std::size_t last) {
  std::size_t i = first;
  for (; i + 4 <= last; i += 4) {
    const __m256d left = _mm256_mul_pd(_mm256_loadu_pd(p + i - 1), _mm256_loadu_pd(up + i - 1));
    const __m256d right = _mm256_mul_pd(_mm256_loadu_pd(p + i + 1), _mm256_loadu_pd(down + i + 1));
    _mm256_storeu_pd(q + i, _mm256_add_pd(left, right));
  }
  for (; i < last; ++i) {
    const double from_left = p[i - 1] * up[i - 1];
    const double from_right = p[i + 1] * down[i + 1];
    q[i] = from_left + from_right;
  }
}

void moments_avx2(const double* p, double origin, std::size_t first, std::size_t last,
                  double out[3]) {
  __m256d m0 = _mm256_setzero_pd();
  __m256d m1 = _mm256_setzero_pd();
  __m256d m2 = _mm256_setzero_pd();
  const __m256d step = _mm256_set1_pd(4.0);
  // Site coordinates are small integers, so x + 4 stays exact.
  const double x0 = origin + static_cast<double>(first);
  __m256d x = _mm256_set_pd(x0 + 3.0, x0 + 2.0, x0 + 1.0, x0);
  std::size_t i = first;
  for (; i + 4 <= last; i += 4) {
    const __m256d w = _mm256_loadu_pd(p + i);
    const __m256d wx = _mm256_mul_pd(w, x);
    m0 = _mm256_add_pd(m0, w);
    m1 = _mm256_add_pd(m1, wx);
    m2 = _mm256_add_pd(m2, _mm256_mul_pd(wx, x));
    x = _mm256_add_pd(x, step);
  }
  alignas(32) double l0[4], l1[4], l2[4];
  _mm256_store_pd(l0, m0);
  _mm256_store_pd(l1, m1);
  _mm256_store_pd(l2, m2);
  for (int lane = 0; i < last; ++i, ++lane) {
    const double w = p[i];
    const double xi = origin + static_cast<double>(i);
    const double wx = w * xi;
    l0[lane] = l0[lane] + w;
    l1[lane] = l1[lane] + wx;
    l2[lane] = l2[lane] + wx * xi;
  }
  out[0] = (l0[0] + l0[1]) + (l0[2] + l0[3]);
  out[1] = (l1[0] + l1[1]) + (l1[2] + l1[3]);
  out[2] = (l2[0] + l2[1]) + (l2[2] + l2[3]);
}

}  // namespace cw::kernels
