#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace visopt {

/// Evaluates fn(i) for i in [0, n) across up to `threads` workers and
/// returns the results in index order, so downstream reductions are
/// independent of the thread count. fn must be safe to call concurrently.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, int threads, Fn&& fn) {
  std::vector<T> out(n);
  if (n == 0) return out;
  const std::size_t workers =
      std::min<std::size_t>(std::max(threads, 1), n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) out[i] = fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
  return out;
}

}  // namespace visopt
