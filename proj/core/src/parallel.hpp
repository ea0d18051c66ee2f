#pragma once

#include <cstddef>
#include <functional>

namespace nlmc::detail {

/// Worker count: NLMC_THREADS when set to a positive integer, otherwise the
/// hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Iterations must be independent; the first
/// exception thrown by any iteration is rethrown on the caller's thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace nlmc::detail
