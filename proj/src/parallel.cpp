#include "ac/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ac {

int thread_budget() {
  if (const char* env = std::getenv("AC_MINMAX_THREADS")) {
    const int v = std::atoi(env);
    return std::clamp(v, 1, 64);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 16u));
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t nth = std::min(static_cast<std::size_t>(thread_budget()), n);
  if (nth <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::mutex gate;
  std::exception_ptr first;
  std::vector<std::thread> pool;
  pool.reserve(nth);
  for (std::size_t t = 0; t < nth; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t k = t; k < n; k += nth) fn(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(gate);
        if (!first) first = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace ac
