#include "lagsurf/exec.hpp"

namespace lagsurf {

namespace {
ExecMode g_mode = ExecMode::Parallel;
}

ExecMode exec_mode() { return g_mode; }
void set_exec_mode(ExecMode mode) { g_mode = mode; }

namespace detail {

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 32) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

} // namespace detail

double det_sum(std::span<const double> v) {
    using detail::kReductionBlock;
    if (v.size() <= kReductionBlock) return detail::pairwise_sum(v);
    const std::size_t nblocks = (v.size() + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial(nblocks);
    parallel_for(nblocks, [&](std::size_t b) {
        const std::size_t off = b * kReductionBlock;
        const std::size_t len = std::min(kReductionBlock, v.size() - off);
        partial[b] = detail::pairwise_sum(v.subspan(off, len));
    });
    return detail::pairwise_sum(partial);
}

double det_max_abs(std::span<const double> v) {
    using detail::kReductionBlock;
    if (v.empty()) return 0.0;
    const std::size_t nblocks = (v.size() + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial(nblocks, 0.0);
    parallel_for(nblocks, [&](std::size_t b) {
        const std::size_t off = b * kReductionBlock;
        const std::size_t len = std::min(kReductionBlock, v.size() - off);
        double m = 0.0;
        for (std::size_t i = 0; i < len; ++i) m = std::max(m, std::abs(v[off + i]));
        partial[b] = m;
    });
    double m = 0.0;
    for (double x : partial) m = std::max(m, x);
    return m;
}

} // namespace lagsurf
