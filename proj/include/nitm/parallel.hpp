#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nitm::parallel {

// Reductions over rows are computed per fixed-size chunk and the chunk
// partials are folded in chunk-index order. The float result is therefore
// bitwise identical for any thread count, including the serial path.
inline constexpr std::size_t kChunk = 2048;

inline std::size_t chunk_count(std::size_t n) { return (n + kChunk - 1) / kChunk; }

// body(chunk_index, begin, end); chunks may run concurrently, so body must
// only write to per-chunk slots.
template <typename F>
void for_each_chunk(std::size_t n, int threads, F&& body) {
  const std::ptrdiff_t chunks = static_cast<std::ptrdiff_t>(chunk_count(n));
#ifdef _OPENMP
  if (threads > 1 && chunks > 1) {
#pragma omp parallel for num_threads(threads) schedule(static)
    for (std::ptrdiff_t c = 0; c < chunks; ++c) {
      const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
      const std::size_t end = begin + kChunk < n ? begin + kChunk : n;
      body(static_cast<std::size_t>(c), begin, end);
    }
    return;
  }
#else
  (void)threads;
#endif
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
    const std::size_t end = begin + kChunk < n ? begin + kChunk : n;
    body(static_cast<std::size_t>(c), begin, end);
  }
}

}  // namespace nitm::parallel
