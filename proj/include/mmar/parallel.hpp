#pragma once

#include <cstddef>
#include <functional>

namespace mmar {

// Worker count: MMAR_THREADS if set and positive, else the hardware count.
int worker_count();

// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index is
// processed exactly once; the first exception thrown by any body is rethrown
// after all workers stop. Bodies must not share mutable state.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mmar
