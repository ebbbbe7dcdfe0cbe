#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace mpsflow {

inline int configured_thread_count() {
  if (const char* env = std::getenv("MPSFLOW_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static partition over [0, n). Each item writes only to its own slot, so
// results are independent of the thread count.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
  const int threads = std::min(configured_thread_count(), n > 0 ? n : 1);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (int i = t; i < n; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace mpsflow
