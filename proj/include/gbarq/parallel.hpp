#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gbarq {

inline std::atomic<int>& default_workers_ref() {
  static std::atomic<int> w{1};
  return w;
}
inline int default_workers() { return default_workers_ref().load(); }
inline void set_default_workers(int w) {
  if (w <= 0) w = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  default_workers_ref().store(w);
}

// Runs fn(i) for i in [0, n). Each index must write only its own outputs, so
// results do not depend on the worker count. The first exception is rethrown.
template <class F>
void parallel_for(std::size_t n, F&& fn, int workers = 0) {
  if (workers <= 0) workers = default_workers();
  const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (nw <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lk(err_mu);
        if (!err) err = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nw - 1);
  for (std::size_t k = 1; k < nw; ++k) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace gbarq
