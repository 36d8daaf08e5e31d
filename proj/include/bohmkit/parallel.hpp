#pragma once

#include <cstddef>
#include <functional>

namespace bohmkit {

/// Worker count used by data-parallel loops (default 1). Results never
/// depend on it: work is split into independent index ranges.
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Calls fn(begin, end) on disjoint chunks covering [0, n).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace bohmkit
