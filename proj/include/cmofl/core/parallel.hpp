#pragma once

#include <cstddef>
#include <functional>

namespace cmofl {

// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is
// handled exactly once; results must be written to per-index slots so the
// outcome does not depend on scheduling. The first exception thrown by any
// body is rethrown after all threads join.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace cmofl
