#pragma once

#include <cstddef>
#include <functional>

namespace gaussct {

// Worker count used by all parallel kernels. 0 = hardware concurrency.
// Initialized from the GAUSSCT_THREADS environment variable when set.
int thread_count();
void set_thread_count(int n);

// Splits [begin, end) into thread_count() contiguous chunks and runs
// fn(chunk_index, chunk_begin, chunk_end) on each, one chunk per worker.
// Chunk boundaries depend only on the range and the configured thread
// count, so reductions that merge chunks in index order are reproducible.
void parallel_chunks(std::size_t begin, std::size_t end,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

// Element-wise variant: fn(i) for i in [begin, end).
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& fn);

} // namespace gaussct
