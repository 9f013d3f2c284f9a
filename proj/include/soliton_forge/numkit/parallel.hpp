#pragma once

#include <cstddef>
#include <functional>

namespace soliton_forge::numkit {

/// Worker count: SOLITON_FORGE_THREADS when set to a positive value, otherwise
/// the hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, n) over contiguous chunks. Each index is computed
/// independently, so results do not depend on the thread count. The first
/// exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace soliton_forge::numkit
