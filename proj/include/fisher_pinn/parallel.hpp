#pragma once

#include <cstddef>
#include <functional>

namespace fisher_pinn {

/// Worker count: FISHER_PINN_THREADS when set to a positive integer, else the
/// hardware concurrency (at least 1).
[[nodiscard]] std::size_t thread_count();

/// Runs task(i) for i in [0, n). Tasks are independent; callers reduce their
/// results in index order afterwards, so output never depends on the worker
/// count. `worker` is the index of the executing worker in [0, workers).
void parallel_for(std::size_t n, const std::function<void(std::size_t task, std::size_t worker)>& task);

}  // namespace fisher_pinn
