#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace eigenshift {

// Worker-count resolution: an explicit positive request wins, then the
// EIGENSHIFT_THREADS environment variable, then hardware concurrency.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("EIGENSHIFT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0u ? static_cast<int>(hw) : 1;
}

// Runs fn(i) for every i in [0, count). Indices are claimed one at a time
// from a shared counter, so each is executed exactly once but in no
// particular order; fn must confine its writes to per-index slots. Under
// that contract the combined result is independent of the worker count.
// The first exception thrown by fn stops the remaining work and is
// rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::int64_t count, Fn&& fn, int threads = 0) {
  if (count <= 0) return;
  const std::int64_t workers =
      std::min<std::int64_t>(resolve_threads(threads), count);
  if (workers <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<std::int64_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::mutex error_mu;

  auto worker = [&] {
    for (;;) {
      if (stop.load(std::memory_order_relaxed)) return;
      const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        {
          const std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
        stop.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (std::int64_t t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace eigenshift
