#pragma once

#include <cstddef>
#include <functional>

namespace maxstorm {

// Worker count: MAXSTORM_THREADS when set to a positive integer, otherwise
// the number of logical cores.
[[nodiscard]] std::size_t default_thread_count();

// Calls body(i) for i in [0, n) on up to `threads` workers. Work is split in
// fixed contiguous chunks; callers that reduce must do so by index.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace maxstorm
