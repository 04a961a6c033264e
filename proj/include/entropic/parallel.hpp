#pragma once

#include <cstddef>
#include <cstdint>

#include <omp.h>

namespace entropic {

/// Worker configuration for path-parallel kernels.
///
/// Every kernel writes per-path results into index-addressed slots and reduces them
/// in a fixed order afterwards, so results do not depend on `threads`.
struct Execution {
  int threads = 0;      // 0 selects the OpenMP default
  bool serial = false;  // run the plain loop without an OpenMP region

  static Execution serial_reference() { return {1, true}; }
  static Execution with_threads(int n) { return {n, false}; }
};

template <class Fn>
void for_each_index(std::size_t n, const Execution& exec, Fn&& fn) {
  if (exec.serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int threads = exec.threads > 0 ? exec.threads : omp_get_max_threads();
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::int64_t i = 0; i < count; ++i) fn(static_cast<std::size_t>(i));
}

}  // namespace entropic
