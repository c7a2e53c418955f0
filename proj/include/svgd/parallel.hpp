#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace svgd {

/// Which implementation of a pairwise kernel to run. `serial` is the plain
/// reference loop kept for testing; `parallel` is the OpenMP version. Both
/// sum each output row in the same fixed order, so they agree bit for bit.
enum class Execution { serial, parallel };

/// Cap on OpenMP workers used by the parallel kernels. 0 restores the default.
void set_max_threads(int threads);
int max_threads();

/// Runs body(i) for i in [0, count). Exceptions thrown by the body are
/// captured and the one from the lowest index is rethrown after the loop,
/// so the error reported does not depend on scheduling.
template <typename Body>
void for_each_index(std::size_t count, Execution exec, Body&& body) {
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::size_t error_index = count;
  std::mutex guard;
  const long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(guard);
      if (static_cast<std::size_t>(i) < error_index) {
        error_index = static_cast<std::size_t>(i);
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace svgd
