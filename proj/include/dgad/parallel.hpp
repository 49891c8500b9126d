#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dgad {

// Work is split into fixed-size chunks whose boundaries do not depend on the
// worker count, so per-chunk reductions combined in chunk order give results
// that are independent of how many threads ran them.
struct ChunkPlan {
  std::size_t items = 0;
  std::size_t chunk = 8;

  std::size_t chunks() const { return chunk == 0 ? 0 : (items + chunk - 1) / chunk; }
  std::size_t begin(std::size_t c) const { return c * chunk; }
  std::size_t end(std::size_t c) const { return std::min(items, (c + 1) * chunk); }
};

std::size_t default_workers();

// Runs fn(chunk_index) for every chunk on up to `workers` threads. The first
// exception thrown by any chunk is rethrown on the calling thread.
template <typename Fn>
void for_each_chunk(const ChunkPlan& plan, std::size_t workers, Fn&& fn) {
  const std::size_t n = plan.chunks();
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers <= 1) {
    for (std::size_t c = 0; c < n; ++c) fn(c);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < n; c += workers) {
        try {
          fn(c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace dgad
