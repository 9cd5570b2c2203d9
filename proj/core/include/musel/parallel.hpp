#pragma once

#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace musel {

// Thread budget: MUSEL_THREADS env var, else hardware concurrency.
inline int default_threads() {
  if (const char* env = std::getenv("MUSEL_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Runs fn(i) for i in [begin, end). Each index owns its outputs, so results
// are independent of the thread count and of scheduling.
inline void parallel_for(long begin, long end, const std::function<void(long)>& fn,
                         int threads = 0) {
  const long n = end - begin;
  if (n <= 0) return;
  if (threads <= 0) threads = default_threads();
  if (threads > n) threads = static_cast<int>(n);
  if (threads <= 1) {
    for (long i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::exception_ptr err;
  std::mutex err_mu;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      const long lo = begin + n * t / threads;
      const long hi = begin + n * (t + 1) / threads;
      try {
        for (long i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace musel
