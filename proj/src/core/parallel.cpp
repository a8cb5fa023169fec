#include "parallel.hpp"

#include <cstdlib>
#include <thread>
#include <vector>

namespace mvc {

std::size_t max_threads() {
  static const std::size_t cached = [] {
    const char* env = std::getenv("GCFAGG_THREADS");
    if (env == nullptr) return std::size_t{1};
    const long v = std::strtol(env, nullptr, 10);
    if (v <= 1) return std::size_t{1};
    return static_cast<std::size_t>(v);
  }();
  return cached;
}

void parallel_rows(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  const std::size_t workers = std::min(max_threads(), n == 0 ? std::size_t{1} : n);
  if (workers <= 1 || n < 64) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(fn, begin, end);
  }
  for (auto& t : pool) t.join();
}

}  // namespace mvc
