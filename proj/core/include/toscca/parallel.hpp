#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace toscca {

/// Runs body(i) for i in [0, count) on up to `threads` workers. Callers
/// write results by index, so output never depends on the schedule. The
/// first exception thrown by any worker is rethrown on the calling thread.
template <typename Body>
void parallel_for(Eigen::Index count, int threads, Body&& body) {
  const auto workers = static_cast<Eigen::Index>(
      std::clamp<Eigen::Index>(threads, 1, std::max<Eigen::Index>(count, 1)));
  if (workers <= 1) {
    for (Eigen::Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<Eigen::Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (Eigen::Index i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers - 1));
  for (Eigen::Index w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace toscca
