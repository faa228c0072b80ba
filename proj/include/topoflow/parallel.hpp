#pragma once

#include <functional>

namespace topoflow {

// Caps the number of worker threads used by every parallel stage.
// 0 restores the default (hardware concurrency). Output never depends on it.
void set_max_threads(int threads);
int max_threads();

// Runs body(begin, end) over [0, count) split into contiguous chunks of at
// most `grain` items. Chunks are claimed dynamically, so body must only write
// state owned by its own range.
void parallel_for(int count, int grain, const std::function<void(int, int)>& body);

}  // namespace topoflow
