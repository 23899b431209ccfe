#pragma once

#include <cstddef>
#include <functional>

namespace ambigseq {

// Worker count: AMBIGSEQ_THREADS when set, else hardware concurrency.
std::size_t default_thread_count();

// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = default). Each
// index is processed exactly once; the first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t threads = 0);

}  // namespace ambigseq
