#ifndef FLASHSIM_PARALLEL_HPP
#define FLASHSIM_PARALLEL_HPP

#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace flashsim::par {

// Thread count is a performance knob only: every kernel below writes into
// index-addressed slots or merges fixed-size block partials in index order,
// so results are bit-identical for any thread count, including 1.

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

inline constexpr std::int64_t kBlock = 1024;

// parallel for over [0, n); f(i) must only touch state owned by index i
template <class F>
void parallel_for(std::int64_t n, F&& f) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
    for (std::int64_t i = 0; i < n; ++i) f(i);
}

template <class F>
void serial_for(std::int64_t n, F&& f) {
    for (std::int64_t i = 0; i < n; ++i) f(i);
}

// sum of f(i) over [0, n) with a fixed block decomposition; partials are
// accumulated per block and merged in block order, so the result does not
// depend on the thread count
template <class F>
double block_sum(std::int64_t n, F&& f) {
    if (n <= 0) return 0.0;
    const std::int64_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(static_cast<std::size_t>(nblocks), 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
    for (std::int64_t b = 0; b < nblocks; ++b) {
        const std::int64_t lo = b * kBlock;
        const std::int64_t hi = std::min(n, lo + kBlock);
        double s = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) s += f(i);
        partial[static_cast<std::size_t>(b)] = s;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

// serial reference for block_sum; must agree bit-for-bit (same blocking)
template <class F>
double block_sum_serial(std::int64_t n, F&& f) {
    if (n <= 0) return 0.0;
    const std::int64_t nblocks = (n + kBlock - 1) / kBlock;
    double total = 0.0;
    for (std::int64_t b = 0; b < nblocks; ++b) {
        const std::int64_t lo = b * kBlock;
        const std::int64_t hi = std::min(n, lo + kBlock);
        double s = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) s += f(i);
        total += s;
    }
    return total;
}

}  // namespace flashsim::par

#endif
