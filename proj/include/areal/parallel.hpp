#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace areal {

// Runs fn(i) for i in [0, n) across `threads` workers on contiguous chunks.
// Workers must write only to disjoint output slots; callers do any reduction
// sequentially afterwards, so results are identical for every thread count.
// If several iterations throw, the exception from the smallest index is
// rethrown to keep failures deterministic.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& fn) {
  const int usable =
      std::max(1, std::min<int>(threads, static_cast<int>(n == 0 ? 1 : n)));
  if (usable == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::mutex mu;
  std::size_t first_bad = n;
  std::exception_ptr first_err;

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(usable));
  const std::size_t chunk = (n + static_cast<std::size_t>(usable) - 1) /
                            static_cast<std::size_t>(usable);
  for (int t = 0; t < usable; ++t) {
    const std::size_t lo = static_cast<std::size_t>(t) * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (i < first_bad) {
            first_bad = i;
            first_err = std::current_exception();
          }
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_err) std::rethrow_exception(first_err);
}

}  // namespace areal
