#pragma once

#include <cstddef>
#include <functional>

namespace netprobe {

// Worker cap for data-parallel loops. 0 restores the default
// (NETPROBE_THREADS if set, else hardware concurrency).
void set_thread_count(unsigned count);
unsigned thread_count();

// Runs body(i) for i in [0, n). Each index must write only its own output slot,
// so results are identical to a sequential loop. The first exception thrown by
// any worker is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace netprobe
