#pragma once

// Deterministic parallel helpers.  Work is split into fixed blocks whose
// results land in preassigned slots; reduction happens afterwards in block
// order (pairwise tree), so output bits never depend on the thread count.

#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nsreg {

inline void set_worker_count(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

inline int worker_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// Run body(b) for b in [0, n_blocks); each call must only write its own slot.
/// The first exception thrown by any block is rethrown after the loop.
template <class Body>
void parallel_blocks(std::int64_t n_blocks, const Body& body) {
    std::exception_ptr first_error = nullptr;
    std::mutex error_mu;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
    for (std::int64_t b = 0; b < n_blocks; ++b) {
        try {
            body(b);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mu);
            if (!first_error) first_error = std::current_exception();
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

/// Pairwise (tree) sum over a fixed-order range: associativity-stable.
inline double pairwise_sum(std::span<const double> xs) {
    const size_t n = xs.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const size_t half = n / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

} // namespace nsreg
