#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cbdp {

// results[i] = make(i) for i in [0, count) on up to `jobs` threads. Work is
// handed out by index, so the result is independent of scheduling as long as
// make(i) depends on i only. The exception of the lowest failing index is rethrown.
template <typename Make>
auto parallel_generate(std::size_t count, unsigned jobs, Make make) -> std::vector<decltype(make(std::size_t{}))> {
  using T = decltype(make(std::size_t{}));
  std::vector<T> results(count);
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) results[i] = make(i);
    return results;
  }
  // Indices are claimed in increasing order, so every index below a failing
  // one is still computed and the lowest failure is reported.
  std::atomic<std::size_t> next{0};
  std::size_t first_failure = count;
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i > first_failure) return;
      }
      try {
        results[i] = make(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i < first_failure) {
          first_failure = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(jobs);
  for (unsigned j = 0; j < jobs; ++j) threads.emplace_back(worker);
  for (auto& thread : threads) thread.join();
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace cbdp
