#pragma once

#include <cstddef>
#include <vector>

#include "liouvlab/types.hpp"

namespace liouvlab {

/// Runs f(i) for i in [0, n). Every index writes only its own slot, so
/// the serial and OpenMP paths produce the same bits.
template <class F>
void for_each_index(Exec exec, std::size_t n, F&& f) {
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  const auto m = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < m; ++i) f(static_cast<std::size_t>(i));
}

/// Pairwise sum in a fixed tree order (independent of thread count).
template <class T>
T pairwise_sum(const std::vector<T>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return v[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

template <class T>
T pairwise_sum(const std::vector<T>& v) {
  if (v.empty()) return T{};
  return pairwise_sum(v, 0, v.size());
}

} // namespace liouvlab
