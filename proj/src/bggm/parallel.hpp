#pragma once

#include <functional>

namespace bggm {

/// 0 means "use all hardware threads".
int resolve_threads(int requested);

/// Runs body(0..n-1) on up to `threads` workers. Tasks must write only to
/// their own output slots; callers aggregate in index order afterwards, so
/// results are identical for any thread count. Exceptions from tasks are
/// rethrown on the calling thread.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace bggm
