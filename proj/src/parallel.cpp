#include "govdisc/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace govdisc {

namespace {
std::atomic<int> g_cap{0};

int env_cap() {
    const char* raw = std::getenv("GOVDISC_THREADS");
    if (raw == nullptr) return 0;
    try {
        return std::max(0, std::stoi(raw));
    } catch (...) {
        return 0;
    }
}
} // namespace

int thread_count() {
#ifdef _OPENMP
    int n = omp_get_max_threads();
#else
    int n = 1;
#endif
    int cap = g_cap.load();
    if (cap == 0) cap = env_cap();
    if (cap > 0) n = std::min(n, cap);
    return std::max(1, n);
}

void set_thread_cap(int threads) { g_cap.store(std::max(0, threads)); }

} // namespace govdisc
