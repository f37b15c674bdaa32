#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace smallnoise {

// Process-wide default worker count (0 = hardware concurrency).
unsigned default_threads();
void set_default_threads(unsigned n);

// Runs body(i) for i in [0, n) on a static block partition.
// Workers never share mutable state through this function; callers write
// results indexed by i, so outputs are identical for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

}  // namespace smallnoise
