#pragma once

#include <cstddef>
#include <cstdint>

namespace depctl {

/// Execution policy for the Monte Carlo kernels. Both policies produce
/// bit-identical results: each work item owns a derived random stream and
/// writes to its own slot, and reductions run serially in index order.
enum class Exec { serial, parallel };

/// Number of worker threads used by Exec::parallel (>= 1).
void set_worker_threads(int n);
int worker_threads();
/// Reads DEPCTL_THREADS; returns fallback when unset or invalid.
int threads_from_env(int fallback);

/// Calls body(i) for i in [0, n). Under Exec::parallel iterations are
/// distributed across OpenMP threads with a static schedule.
template <class Body>
void for_each_index(Exec exec, std::size_t n, Body&& body) {
    if (exec == Exec::serial || worker_threads() <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) num_threads(worker_threads())
    for (std::int64_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

} // namespace depctl
