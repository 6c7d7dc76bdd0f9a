#pragma once

#include <cstddef>
#include <functional>

namespace chainspec {

// Worker count for data-parallel loops: an explicit set_thread_count wins,
// then CHAINSPEC_THREADS, then hardware concurrency. Passing n <= 0 resets to
// auto-detection.
int thread_count();
void set_thread_count(int n);

// Splits [0, n) into one contiguous chunk per worker and runs
// fn(begin, end, chunk_index), joining before returning. Chunk boundaries
// depend only on n and the worker count, so callers that reduce per-chunk
// buffers in chunk order get run-to-run deterministic sums.
void parallel_chunks(
    std::size_t n,
    const std::function<void(std::size_t, std::size_t, int)>& fn);

}  // namespace chainspec
