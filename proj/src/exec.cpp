#include "frfm/exec.hpp"

#include <cstdlib>
#include <string>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace frfm {

int max_threads() {
    if (const char* env = std::getenv("FRFM_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
            // fall through to the default on a malformed value
        }
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
#endif
}

namespace detail {

void par_for_impl(std::int64_t n, void* ctx, void (*body)(void*, std::int64_t)) {
#ifdef _OPENMP
    const int threads = max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) body(ctx, i);
#else
    for (std::int64_t i = 0; i < n; ++i) body(ctx, i);
#endif
}

}  // namespace detail
}  // namespace frfm
