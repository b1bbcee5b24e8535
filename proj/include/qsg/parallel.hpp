#pragma once

#include <cstddef>
#include <functional>

namespace qsg {

// Runs body(i) for i in [0, n) across `workers` threads (workers <= 1 runs
// inline).  Work items must be independent; each writes to its own output
// slot, so results cannot depend on scheduling or worker count.  The first
// exception thrown by any item is rethrown on the calling thread after all
// workers join.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

}  // namespace qsg
