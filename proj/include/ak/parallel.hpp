#pragma once

#include <cstddef>
#include <functional>

namespace ak {

/// Worker count: AK_THREADS if set and positive, else hardware concurrency.
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Each index must write only its own output
/// slot; results are then independent of scheduling. Exceptions thrown by
/// body are rethrown on the calling thread (the lowest failing index wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ak
