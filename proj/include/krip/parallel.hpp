#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace krip {

/// Runs body(0..count-1) on up to `jobs` threads (0 = hardware concurrency).
/// Tasks must write only to their own slots; callers reduce afterwards in
/// index order, so results do not depend on the parallelism degree.
inline void parallel_for(long count, int jobs,
                         const std::function<void(long)>& body) {
  if (count <= 0) return;
  int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = static_cast<int>(std::min<long>(workers, count));
  if (workers == 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<long> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      const long i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) break;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace krip
