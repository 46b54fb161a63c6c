#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace bamle {

/// Resolves a requested worker count; 0 means one per hardware thread.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls f(chunk, begin, end) over contiguous chunks of [0, n). Chunk
/// boundaries depend only on n and the worker count, and small ranges run
/// inline, so callers that reduce per-chunk results in chunk order stay
/// deterministic.
template <class F>
void parallel_chunks(std::size_t n, unsigned threads, std::size_t min_grain, F&& f) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(resolve_threads(threads), n / std::max<std::size_t>(1, min_grain)));
  if (workers <= 1) {
    f(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  const std::size_t step = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t c = 1; c < workers; ++c) {
    const std::size_t b = std::min(n, c * step);
    const std::size_t e = std::min(n, b + step);
    pool.emplace_back([&f, c, b, e] { f(c, b, e); });
  }
  f(std::size_t{0}, std::size_t{0}, std::min(n, step));
}

/// Number of chunks parallel_chunks will use for the same arguments.
inline std::size_t chunk_count(std::size_t n, unsigned threads, std::size_t min_grain) {
  return std::max<std::size_t>(1, std::min<std::size_t>(resolve_threads(threads), n / std::max<std::size_t>(1, min_grain)));
}

}  // namespace bamle
