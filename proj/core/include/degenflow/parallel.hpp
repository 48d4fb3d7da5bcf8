#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace degenflow::parallel {

/// Worker count from DEGENFLOW_THREADS (>= 1), else hardware concurrency.
std::size_t thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() workers. Each index is
/// written by exactly one worker, so results do not depend on scheduling.
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& body);

template <typename T, typename F>
std::vector<T> map(std::size_t n, F&& f) {
  std::vector<T> out(n);
  for_each_index(n, [&](std::size_t i) { out[i] = f(i); });
  return out;
}

}  // namespace degenflow::parallel
