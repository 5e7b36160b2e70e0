#pragma once

#include <cstddef>
#include <string_view>

namespace cw::kernels {

// Forward step of the quenched birth-death chain on a dense site array:
//   q[i] = p[i-1] * up[i-1] + p[i+1] * down[i+1]   for i in [first, last)
// The caller guarantees 1 <= first and last + 1 <= array length.
using DpStepFn = void (*)(const double* p, const double* up, const double* down, double* q,
                          std::size_t first, std::size_t last);

// Weighted moments of a mass vector over sites x_i = origin + i, i in [first, last):
//   out[0] = sum p_i, out[1] = sum p_i x_i, out[2] = sum p_i x_i^2
// Accumulated in four interleaved lanes combined as (l0 + l1) + (l2 + l3),
// so every variant returns bit-identical results.
using MomentsFn = void (*)(const double* p, double origin, std::size_t first, std::size_t last,
                           double out[3]);

void dp_step_scalar(const double* p, const double* up, const double* down, double* q,
                    std::size_t first, std::size_t last);
void moments_scalar(const double* p, double origin, std::size_t first, std::size_t last,
                    double out[3]);

#if defined(CW_HAVE_AVX2_KERNELS)
void dp_step_avx2(const double* p, const double* up, const double* down, double* q,
                  std::size_t first, std::size_t last);
void moments_avx2(const double* p, double origin, std::size_t first, std::size_t last,
                  double out[3]);
#endif

bool avx2_available() noexcept;

// Selected once per process: AVX2 when the CPU supports it, unless
// COOLING_WALK_KERNEL=scalar forces the reference path.
DpStepFn dp_step() noexcept;
MomentsFn moments() noexcept;
std::string_view active_isa() noexcept;

}  // namespace cw::kernels
