#pragma once

#include <cstddef>
#include <functional>

namespace aplanc {

/// Worker count for n independent jobs: hardware concurrency, capped by the
/// RADAR_APLANC_THREADS environment variable when set (a cap of 0 or an
/// unparsable value means 1).
std::size_t worker_count(std::size_t n_jobs);

/// Run fn(i) for i in [0, n) across worker threads. Iterations must be
/// independent; exceptions propagate (the first one thrown by index order).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace aplanc
