#pragma once

#include <functional>

namespace womble {

/// Runs f(0), ..., f(n - 1) on up to `threads` workers pulling indices from
/// a shared counter. The first exception is rethrown after all workers join.
void parallel_for(int n, int threads, const std::function<void(int)>& f);

}  // namespace womble
