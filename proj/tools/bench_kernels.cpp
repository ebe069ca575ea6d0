// Timing comparison of the serial reference path against the OpenMP path for
// the pointwise kernels (Wirtinger derivative, Gauss residual assembly, norm
// reduction) and the column-parallel grid reconstruction. Outputs one line
// per kernel with both timings and the speedup.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "lagsurf/catalog.hpp"
#include "lagsurf/exec.hpp"
#include "lagsurf/integrability.hpp"
#include "lagsurf/reconstruction.hpp"

using namespace lagsurf;
using clock_type = std::chrono::steady_clock;

namespace {

template <class F>
double time_ms(F&& fn, int reps) {
    fn(); // warm up
    const auto t0 = clock_type::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto t1 = clock_type::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-24s serial %9.3f ms   openmp %9.3f ms   speedup %5.2fx\n", name, serial_ms,
                parallel_ms, serial_ms / parallel_ms);
}

} // namespace

int main(int argc, char** argv) {
    int n = 1024;
    int reps = 5;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--n" && i + 1 < argc) n = std::atoi(argv[++i]);
        if (a == "--reps" && i + 1 < argc) reps = std::atoi(argv[++i]);
    }

    ConformalChart chart{n, n, 0.0, 1.0, 0.0, 1.0};
    SurfaceData data = make_constant_solution(chart, 0, 0.0, 1.0, 1.0);
    // Non-trivial fields so the kernels do representative work.
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const double x = chart.x(ix), y = chart.y(iy);
            data.u.at(ix, iy) = 0.1 * std::sin(3.0 * x) * std::cos(2.0 * y);
            data.phi.at(ix, iy) = cplx(std::cos(x), std::sin(y));
            data.psi.at(ix, iy) = cplx(1.0 + 0.2 * x * y, 0.3 * x);
        }
    }

    std::printf("grid %dx%d, %d reps per measurement\n", n, n, reps);

    auto bench_both = [&](const char* name, auto&& fn) {
        set_exec_mode(ExecMode::Serial);
        const double ts = time_ms(fn, reps);
        set_exec_mode(ExecMode::Parallel);
        const double tp = time_ms(fn, reps);
        report(name, ts, tp);
    };

    bench_both("wirtinger_derivative", [&]() {
        volatile double sink = derivative(data.psi, Wirtinger::Dzbar)[0].real();
        (void)sink;
    });
    bench_both("integrability_bundle", [&]() {
        volatile double sink = integrability_residuals(data).gauss_norms.l2;
        (void)sink;
    });
    RealField big(chart);
    for (std::size_t i = 0; i < big.size(); ++i) big[i] = std::sin(0.001 * i);
    bench_both("det_norm_reduction", [&]() {
        volatile double sink = field_norms(big).l2;
        (void)sink;
    });

    const int rn = std::min(n, 128);
    ConformalChart rchart{rn, rn, 0.0, 1.0, 0.0, 1.0};
    SurfaceData rdata = make_constant_solution(rchart, 0, 0.0, 1.0, 1.0);
    bench_both("reconstruct_grid_128", [&]() {
        volatile double sink = reconstruct_grid(rdata, {0, 0}).cross_defect;
        (void)sink;
    });
    return 0;
}
