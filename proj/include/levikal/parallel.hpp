#pragma once

#include <cstddef>
#include <functional>

namespace levikal {

// Worker count: hardware concurrency capped by LEVIKAL_THREADS when set.
unsigned worker_count();

// Runs body(i) for i in [0, count) on up to worker_count() threads. Each index
// is processed exactly once; the first exception is rethrown after joining.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace levikal
