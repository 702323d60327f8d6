#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace kronocov {

namespace detail {
inline std::atomic<unsigned>& thread_cap() {
  static std::atomic<unsigned> cap{0};
  return cap;
}
}  // namespace detail

/// Worker count used by parallel_for: the explicit cap if set, else
/// KRONOCOV_THREADS, else hardware concurrency.
inline unsigned worker_count() {
  if (unsigned cap = detail::thread_cap().load()) return cap;
  if (const char* env = std::getenv("KRONOCOV_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// 0 restores the default.
inline void set_worker_count(unsigned n) { detail::thread_cap().store(n); }

/// Calls body(i) for i in [0, count). Each index is visited exactly once;
/// results must be written to index-addressed slots so that the outcome does
/// not depend on scheduling. The first exception thrown is rethrown.
template <class Body>
void parallel_for(std::size_t count, Body&& body, unsigned workers = 0) {
  if (workers == 0) workers = worker_count();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
  }
  if (error) std::rethrow_exception(error);
}

/// Pairwise summation: the result depends only on the order of `values`.
template <class Range>
double pairwise_sum(const Range& values, std::size_t begin, std::size_t end) {
  if (end - begin <= 8) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += values[i];
    return s;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  return pairwise_sum(values, begin, mid) + pairwise_sum(values, mid, end);
}

template <class Range>
double pairwise_sum(const Range& values) {
  return pairwise_sum(values, 0, values.size());
}

}  // namespace kronocov
