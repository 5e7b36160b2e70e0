#include <cstdlib>
#include <cstring>

#include "cw/kernels/dp_kernels.hpp"

namespace cw::kernels {

namespace {

struct Selection {
  DpStepFn step = dp_step_scalar;
  MomentsFn moments = moments_scalar;
  std::string_view isa = "scalar";
};

Selection select() noexcept {
  Selection s;
  const char* forced = std::getenv("COOLING_WALK_KERNEL");
  if (forced && std::strcmp(forced, "scalar") == 0) return s;
#if defined(CW_HAVE_AVX2_KERNELS)
  if (avx2_available()) {
    s.step = dp_step_avx2;
    s.moments = moments_avx2;
    s.isa = "avx2";
  }
#endif
  return s;
}

const Selection& selection() noexcept {
  static const Selection s = select();
  return s;
}

}  // namespace

bool avx2_available() noexcept {
#if defined(CW_HAVE_AVX2_KERNELS)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

DpStepFn dp_step() noexcept { return selection().step; }
MomentsFn moments() noexcept { return selection().moments; }
std::string_view active_isa() noexcept { return selection().isa; }

}  // namespace cw::kernels
