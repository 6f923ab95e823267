#pragma once

#include <cstddef>
#include <functional>

namespace rffp {

std::size_t hardware_threads();

// Runs fn(begin, end) over a blocked partition of [0, n) using `threads`
// workers (0 = hardware_threads()). The first worker exception, if any, is
// rethrown after all workers join. Callers keep results deterministic by
// writing into index-addressed slots.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace rffp
