#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace shepvi::detail {

// Worker count: explicit override (tests), else SHEPVI_THREADS, else
// hardware concurrency.  Always >= 1.
int thread_count();
void set_thread_override(int n);  // n <= 0 clears the override

// Static contiguous partition of [0, n) into one chunk per worker; fn is
// called as fn(chunk_begin, chunk_end).  Chunk boundaries depend only on n
// and the worker count, and every index is written by exactly one worker, so
// results never depend on scheduling.  Falls back to a plain loop for small
// n or a single worker.
template <class Fn>
void parallel_for(std::int64_t n, Fn&& fn, std::int64_t grain = 2048) {
  if (n <= 0) return;
  const int workers = thread_count();
  if (workers <= 1 || n < grain) {
    fn(std::int64_t{0}, n);
    return;
  }
  const int chunks = workers;
  std::vector<std::thread> pool;
  pool.reserve(chunks - 1);
  for (int c = 1; c < chunks; ++c) {
    const std::int64_t b = n * c / chunks;
    const std::int64_t e = n * (c + 1) / chunks;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  fn(std::int64_t{0}, n * 1 / chunks);
  for (auto& t : pool) t.join();
}

}  // namespace shepvi::detail
