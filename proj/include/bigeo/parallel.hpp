#pragma once

#include <cstddef>
#include <functional>

namespace bigeo {

/// Number of worker threads used by data-parallel loops. Defaults to 1.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Runs body(i) for i in [0, n), split into contiguous blocks across
/// thread_count() workers. body must only write to state owned by index i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace bigeo
