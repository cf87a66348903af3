#pragma once

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

#include "proxyclust/types.hpp"

namespace proxyclust {

// Runs fn(i) for i in [0, n) on up to `workers` threads; rethrows the first
// failure by index after all work finishes.
template <typename Fn>
void parallel_for(Index n, int workers, Fn&& fn) {
  if (n <= 0) return;
  const int threads = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (threads == 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<Index> next{0};
  auto worker = [&] {
    for (Index i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace proxyclust
