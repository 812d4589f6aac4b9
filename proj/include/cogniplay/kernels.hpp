#pragma once

#include <cstddef>
#include <exception>
#include <span>

#include "cogniplay/policy.hpp"

namespace cogniplay::kernels {

// How a data-parallel kernel runs. Both modes produce bit-identical results:
// each work item writes only its own slot and reductions happen serially in
// index order afterwards.
enum class Exec { Serial, Parallel };

int max_threads();
void set_threads(int n);

// Calls body(i) for every i in [0, n). The first exception thrown by any item
// is rethrown after the loop.
template <class Body>
void for_each_index(std::size_t n, Exec exec, Body&& body) {
  std::exception_ptr failure;
  if (exec == Exec::Serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(cogniplay_kernel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

// Per-sample gradients computed independently, then summed in sample order.
BatchGradient batch_gradient(const FeatureSet& fs, std::span<const TrainingExample> batch,
                             Exec exec);

}  // namespace cogniplay::kernels
