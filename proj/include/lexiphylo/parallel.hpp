#pragma once
// Static-partition parallel loop. Callers write results into per-index slots
// and reduce in index order, so output never depends on the worker count.

#include <cstddef>
#include <functional>

namespace lexiphylo {

// 0 resets to the default (LEXIPHYLO_THREADS, else hardware concurrency).
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs body(i) for i in [0, n). Exceptions from workers are rethrown on the
// calling thread (the one from the lowest failing chunk wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lexiphylo
