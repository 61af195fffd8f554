#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nac {

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is
/// handled exactly once; callers write results into slot i, so the outcome
/// does not depend on scheduling. The first exception is rethrown.
template <class Body>
void parallel_for(std::size_t n, int workers, Body&& body) {
  workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace nac
