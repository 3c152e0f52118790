#pragma once

#include <cstddef>
#include <functional>

namespace afp {

/// AFP_THREADS when set to a positive integer, otherwise 1.
int default_thread_count();

/// Splits [0, n) into contiguous chunks, one per thread. The partition depends
/// only on n and threads, so results written per index are deterministic.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t begin, std::size_t end)>& body);

}  // namespace afp
