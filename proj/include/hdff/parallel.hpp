#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace hdff {

/// Runs task(k) for k in [0, count) on up to `threads` workers. Tasks write to
/// their own output slots, so results never depend on the worker count. The
/// exception of the lowest failing task index is rethrown after all workers
/// stop.
template <typename Task>
void parallel_for(std::size_t count, unsigned threads, Task&& task) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), count);
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) task(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto run = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        task(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  pool.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Fixed chunking of [0, n); independent of the thread count so partial sums
/// merge in the same order on every run.
inline constexpr std::size_t kChunkSize = 64;

inline std::size_t chunk_count(std::size_t n) { return (n + kChunkSize - 1) / kChunkSize; }

}  // namespace hdff
