// parallel.hpp
//
// Minimal block-parallel driver. Work is always cut into the same blocks
// regardless of the thread count, and each block writes only its own
// output slot, so callers that combine block results in index order get
// bit-identical answers for any number of threads.

#pragma once

#include <cstddef>
#include <functional>

namespace subbasis {

// Number of worker threads used by parallel_blocks. Defaults to the
// hardware concurrency; 0 restores the default.
void set_thread_count(unsigned threads);
unsigned thread_count();

// Calls fn(block) for every block in [0, n_blocks). Blocks may run
// concurrently and in any order. The first exception thrown is rethrown.
void parallel_blocks(std::size_t n_blocks, const std::function<void(std::size_t)>& fn);

}  // namespace subbasis
