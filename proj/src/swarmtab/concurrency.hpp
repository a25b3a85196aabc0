#pragma once

#include <cstddef>
#include <functional>

namespace swarmtab {

// Worker cap from SWARMTAB_THREADS, falling back to hardware concurrency.
// Always >= 1.
std::size_t max_threads();

// Runs fn(i) for i in [0, n). Work items must be independent; results must
// not depend on execution order. Runs inline when the thread cap is 1.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace swarmtab
