#include "depctl/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace depctl {

namespace {

int default_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

std::atomic<int>& thread_setting() {
    static std::atomic<int> n{threads_from_env(default_threads())};
    return n;
}

} // namespace

void set_worker_threads(int n) { thread_setting().store(n < 1 ? 1 : n); }

int worker_threads() { return thread_setting().load(); }

int threads_from_env(int fallback) {
    const char* raw = std::getenv("DEPCTL_THREADS");
    if (raw == nullptr) return fallback;
    try {
        const int n = std::stoi(raw);
        return n >= 1 ? n : fallback;
    } catch (...) {
        return fallback;
    }
}

} // namespace depctl
