#pragma once

#include <cstddef>
#include <functional>

namespace coxsde {

/// Worker count: COXSDE_THREADS if set, else the hardware concurrency.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Callers keep
/// results deterministic by writing to slot i and reducing in index order.
/// The first exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace coxsde
