#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace lagsurf {

// Process-wide switch between the serial reference path and the OpenMP path.
// Every kernel produces bit-identical results in both modes: per-point loops
// are order-independent and reductions use a fixed pairwise tree.
enum class ExecMode { Serial, Parallel };

ExecMode exec_mode();
void set_exec_mode(ExecMode mode);

namespace detail {

// Pairwise (tree) summation over a fixed split order. The tree shape depends
// only on the input length, never on the thread count.
double pairwise_sum(std::span<const double> v);

constexpr std::size_t kReductionBlock = 4096;

} // namespace detail

template <class F>
void parallel_for(std::size_t n, F&& body) {
#if defined(_OPENMP)
    if (exec_mode() == ExecMode::Parallel && n >= 2) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            body(static_cast<std::size_t>(i));
        }
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) {
        body(i);
    }
}

// Deterministic sum: fixed-size blocks reduced pairwise, block partials
// reduced pairwise again. Identical bits for any thread count.
double det_sum(std::span<const double> v);

// Max of |v[i]| is order-independent; still blocked so big fields parallelize.
double det_max_abs(std::span<const double> v);

} // namespace lagsurf
