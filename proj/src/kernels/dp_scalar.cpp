#include "cw/kernels/dp_kernels.hpp"

namespace cw::kernels {

void dp_step_scalar(const double* p, const double* up, const double* down, double* q,
                    std::size_t first, std::size_t last) {
  for (std::size_t i = first; i < last; ++i) {
    const double from_left = p[i - 1] * up[i - 1];
    const double from_right = p[i + 1] * down[i + 1];
    q[i] = from_left + from_right;
  }
}

void moments_scalar(const double* p, double origin, std::size_t first, std::size_t last,
                    double out[3]) {
  double m0[4] = {0.0, 0.0, 0.0, 0.0};
  double m1[4] = {0.0, 0.0, 0.0, 0.0};
  double m2[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = first;
  for (; i + 4 <= last; i += 4) {
    for (int lane = 0; lane < 4; ++lane) {
      const double w = p[i + lane];
      const double x = origin + static_cast<double>(i + lane);
      const double wx = w * x;
      m0[lane] = m0[lane] + w;
      m1[lane] = m1[lane] + wx;
      m2[lane] = m2[lane] + wx * x;
    }
  }
  for (int lane = 0; i < last; ++i, ++lane) {
    const double w = p[i];
    const double x = origin + static_cast<double>(i);
    const double wx = w * x;
    m0[lane] = m0[lane] + w;
    m1[lane] = m1[lane] + wx;
    m2[lane] = m2[lane] + wx * x;
  }
  out[0] = (m0[0] + m0[1]) + (m0[2] + m0[3]);
  out[1] = (m1[0] + m1[1]) + (m1[2] + m1[3]);
  out[2] = (m2[0] + m2[1]) + (m2[2] + m2[3]);
}

}  // namespace cw::kernels
