#pragma once

#include <exception>
#include <mutex>

namespace lslr::detail {

// OpenMP loop that forwards the first exception thrown by `body` to the
// caller instead of terminating.
template <typename Body>
void parallel_for(long count, Body&& body) {
  std::exception_ptr failure;
  std::mutex failure_mutex;
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace lslr::detail
