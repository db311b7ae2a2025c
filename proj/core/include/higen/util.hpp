#ifndef HIGEN_UTIL_HPP
#define HIGEN_UTIL_HPP

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace higen {

/// Worker count: HIGEN_THREADS when set, otherwise hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("HIGEN_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(i) for i in [0, n). Results must be written to per-index slots;
/// the call returns after all indices finish, so a sequential merge over
/// slots stays deterministic.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const int threads = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t i = static_cast<std::size_t>(t); i < n;
           i += static_cast<std::size_t>(threads))
        fn(i);
    });
  }
  for (std::thread& th : pool) th.join();
}

}  // namespace higen

#endif  // HIGEN_UTIL_HPP
