#include "girf/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

namespace girf {

namespace {

int initial_worker_count() {
  if (const char* env = std::getenv("GIRF_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  return omp_get_max_threads();
}

std::atomic<int>& workers() {
  static std::atomic<int> count{initial_worker_count()};
  return count;
}

}  // namespace

int worker_count() { return workers().load(); }

void set_worker_count(int threads) { workers().store(threads > 0 ? threads : 1); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  const int threads = worker_count();
  if (threads <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr first_error;
  std::size_t first_index = std::numeric_limits<std::size_t>::max();
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(threads)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(girf_parallel_error)
      {
        if (static_cast<std::size_t>(i) < first_index) {
          first_index = static_cast<std::size_t>(i);
          first_error = std::current_exception();
        }
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace girf
