#pragma once

#include <cstddef>
#include <functional>

namespace annealnqs {

/// Worker cap: NQS_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Runs body(begin, end) over [0, n) split into fixed chunks. The chunk
/// boundaries depend only on n and chunk, never on the thread count, so
/// per-chunk results are reproducible.
void parallel_for_chunks(std::size_t n, std::size_t chunk,
                         const std::function<void(std::size_t chunk_index, std::size_t begin,
                                                  std::size_t end)>& body);

}  // namespace annealnqs
