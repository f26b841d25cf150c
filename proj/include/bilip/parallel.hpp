#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bilip {

/// Worker count for data-parallel stages; 0 means hardware concurrency.
inline std::atomic<unsigned>& worker_setting() {
  static std::atomic<unsigned> w{0};
  return w;
}
inline void set_workers(unsigned n) { worker_setting() = n; }
inline unsigned workers() {
  unsigned w = worker_setting();
  if (w == 0) w = std::max(1u, std::thread::hardware_concurrency());
  return w;
}

/// Runs f(i) for i in [0, n). Results must be written to per-index slots so the
/// outcome does not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  unsigned w = std::min<std::size_t>(workers(), (n + 63) / 64);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto body = [&] {
    try {
      for (;;) {
        std::size_t b = next.fetch_add(64);
        if (b >= n) break;
        std::size_t e = std::min(n, b + 64);
        for (std::size_t i = b; i < e; ++i) f(i);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lk(mu);
      if (!err) err = std::current_exception();
      next = n;
    }
  };
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < w; ++k) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace bilip
