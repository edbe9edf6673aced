#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace girf {

/// Number of worker threads used by parallel loops. Defaults to the value
/// of GIRF_THREADS, else the OpenMP default.
int worker_count();
void set_worker_count(int threads);

/// Runs body(i) for i in [0, n) across the worker pool with a static
/// schedule. Results must not depend on scheduling: every iteration owns its
/// output slot and its random stream. The first exception (lowest index) is
/// rethrown after the loop completes.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace girf
