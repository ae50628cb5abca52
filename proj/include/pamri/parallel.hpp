#pragma once

#include <cstddef>
#include <functional>

namespace pamri {

/// Resolves the worker count: PAMRI_WORKERS env var wins, then `requested`,
/// then hardware concurrency. Always >= 1.
int worker_count(int requested = 0);

/// Runs fn(0..n-1) on up to `workers` threads. Results must be written to
/// per-index slots by the caller; iteration order is unspecified but the
/// index set is exact, so deterministic reductions are the caller's choice.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace pamri
