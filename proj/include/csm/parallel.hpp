#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace csm {

inline int default_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// Calls fn(i) for i in [0, count) on up to `jobs` threads. Exceptions are
// collected per index and the lowest-index one is rethrown after all
// workers finish, so failures are reported deterministically.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace csm
