#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include "trackgraph/core_model.hpp"

namespace trackgraph::detail {

// Runs fn(i) for i in [0, n). In Parallel mode iterations are spread over
// OpenMP threads; an exception from any iteration is rethrown after the loop
// (the one with the lowest index, so failures are reproducible).
template <typename Fn>
void parallel_for(std::size_t n, ExecutionPolicy policy, Fn&& fn) {
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (policy == ExecutionPolicy::Serial || n < 2) {
    for (std::ptrdiff_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
    return;
  }
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace trackgraph::detail
