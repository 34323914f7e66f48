#pragma once

#include <cstdint>

namespace frfm {

// Execution policy for the data-parallel kernels. Both paths compute
// bit-identical results; `parallel` only changes how loop iterations are
// scheduled across threads.
enum class Exec { serial, parallel };

// Thread count used by parallel kernels: FRFM_THREADS if set and positive,
// otherwise the OpenMP / hardware default. Always >= 1.
int max_threads();

namespace detail {

void par_for_impl(std::int64_t n, void* ctx, void (*body)(void*, std::int64_t));

// Runs body(i) for i in [0, n). Iterations must be independent.
template <typename F>
void par_for(Exec exec, std::int64_t n, F&& body) {
    if (exec == Exec::serial || n < 2) {
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
    par_for_impl(n, &body, [](void* ctx, std::int64_t i) { (*static_cast<F*>(ctx))(i); });
}

}  // namespace detail
}  // namespace frfm
