#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace ynet {

/// Worker count: hardware concurrency, capped by the YNET_THREADS env var.
inline int thread_cap() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("YNET_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1 && cap < n) n = cap;
  }
  return n;
}

/// Runs fn(i) for i in [0, n). Each index is processed exactly once; callers
/// write results into per-index slots, so the outcome does not depend on the
/// schedule or the thread count.
template <typename Fn>
void parallel_for(int n, Fn&& fn, int threads = thread_cap()) {
  if (n <= 0) return;
  if (threads <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(threads, n);
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&]() {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace ynet
