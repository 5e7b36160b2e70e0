#pragma once

#include <cstddef>
#include <functional>

namespace cw {

/// Worker count from COOLING_WALK_WORKERS, falling back to hardware concurrency.
std::size_t default_workers();

/// Runs body(i) for i in [0, count) across `workers` threads. Tasks are handed
/// out in contiguous index chunks; callers write results into slot i so the
/// merged output never depends on scheduling. The first exception thrown by
/// any task is rethrown on the calling thread.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace cw
