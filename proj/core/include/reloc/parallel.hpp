#pragma once

#include <cstddef>
#include <functional>

namespace reloc {

/// Resolves a worker count: values <= 0 mean "use RELOC_KIT_THREADS if set,
/// else hardware concurrency".
[[nodiscard]] int resolve_thread_count(int requested);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index runs
/// exactly once; callers write results to disjoint slots, so output does not
/// depend on the worker count. If any call throws, the exception from the
/// lowest failing index is rethrown after all workers join.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace reloc
