#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace nnlb {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Splits [0, count) into contiguous chunks and runs fn(begin, end, chunk) on
// each, one chunk per worker thread. fn must be safe to run concurrently on
// disjoint ranges; chunk is the worker index for per-worker accumulators.
inline void parallel_chunks(long count, int threads,
                            const std::function<void(long, long, int)>& fn) {
  if (count <= 0) return;
  int nthreads = std::min<long>(resolve_threads(threads), count);
  if (nthreads <= 1) {
    fn(0, count, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  const long chunk = (count + nthreads - 1) / nthreads;
  for (int t = 0; t < nthreads; ++t) {
    const long begin = t * chunk;
    const long end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end, t] { fn(begin, end, t); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace nnlb
