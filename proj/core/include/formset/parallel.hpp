#pragma once

#include <functional>

namespace formset {

/// Worker count for data-parallel loops: hardware concurrency, capped by the
/// FORMSET_THREADS environment variable and by set_worker_cap().
int worker_count();

/// Process-wide cap (1 = fully deterministic single worker, 0 = uncapped).
void set_worker_cap(int cap);

/// Runs fn(0..n-1). Results must be written to per-index slots; the
/// partitioning across threads is unspecified but the output is
/// deterministic as long as fn(i) is.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace formset
