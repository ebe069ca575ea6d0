// Acceptance suite: one pass/fail line per criterion, every tolerance pinned
// in code. Exit status = number of failed criteria.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <random>
#include <string>
#include <vector>

#include "lagsurf/bonnet.hpp"
#include "lagsurf/catalog.hpp"
#include "lagsurf/extraction.hpp"
#include "lagsurf/integrability.hpp"
#include "lagsurf/io.hpp"
#include "lagsurf/reconstruction.hpp"

using namespace lagsurf;

namespace {

int g_failures = 0;

void criterion(int id, bool pass, const std::string& what, const std::string& detail) {
    std::printf("criterion %2d: %s  %s (%s)\n", id, pass ? "PASS" : "FAIL", what.c_str(),
                detail.c_str());
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

ComplexField field_of(const ConformalChart& c, cplx (*fn)(cplx)) {
    ComplexField out(c);
    for (int iy = 0; iy < c.ny; ++iy)
        for (int ix = 0; ix < c.nx; ++ix) out.at(ix, iy) = fn(c.z(ix, iy));
    return out;
}

// 1. Integrability exactness on the three constant catalog solutions.
void criterion_1() {
    const ConformalChart chart{64, 64, 0.0, 1.0, 0.0, 1.0};
    double worst = 0.0;
    for (auto [c, u0, phi0, psi0] :
         {std::tuple{0, 0.0, cplx(1, 0), cplx(1, 0)}, std::tuple{-1, 0.0, cplx(1, 0), cplx(0, 0)},
          std::tuple{1, 0.0, cplx(0, 0), cplx(1, 0)}}) {
        const SurfaceData d = make_constant_solution(chart, c, u0, phi0, psi0);
        worst = std::max(worst, integrability_residuals(d).max_linf());
    }
    criterion(1, worst <= 1e-12, "constant solutions, integrability L_inf <= 1e-12 on 64x64",
              fmt("worst = %.3e", worst));
}

// 2. O(h^2) convergence of the Gauss residual on the oscillating profile.
void criterion_2() {
    auto gauss = [](int n) {
        const ConformalChart chart{n, 8, 0.0, 2.0, 0.0, 0.5};
        return integrability_residuals(solve_profile_ode(chart, 1, 1.0, 0.01, 0.0))
            .gauss_norms.linf;
    };
    const double e32 = gauss(32), e64 = gauss(64), e128 = gauss(128);
    const double r1 = e32 / e64, r2 = e64 / e128;
    const bool pass = r1 >= 3.5 && r1 <= 4.5 && r2 >= 3.5 && r2 <= 4.5;
    criterion(2, pass, "profile Gauss residual refines at O(h^2), ratios in [3.5, 4.5]",
              fmt("L_inf = %.3e / %.3e / %.3e, ratios %.2f, %.2f", e32, e64, e128, r1, r2));
}

// 3. Round trip of reconstruction and extraction.
void criterion_3() {
    const ConformalChart chart{128, 128, 0.0, 1.0, 0.0, 1.0};
    const SurfaceData d = make_constant_solution(chart, 0, 0.0, 1.0, 1.0);
    const auto rec = reconstruct_grid(d, {0, 0});
    const auto ext = extract_data(rec.immersion);
    const auto dist = data_distance(ext.data, d, 1e-4);
    const bool pass = dist.du <= 1e-4 && dist.dphi <= 1e-4 && dist.dpsi <= 1e-4;
    criterion(3, pass, "extract(reconstruct(d)) vs d <= 1e-4 on 128x128 (c=0 constant)",
              fmt("du = %.3e, dphi = %.3e, dpsi = %.3e", dist.du, dist.dphi, dist.dpsi));
}

// 4. Frame-invariant conservation along a length-2pi path at step 2pi/256.
void criterion_4() {
    // Closed square of perimeter 2pi, side pi/2, 64 steps per side.
    const double side = M_PI / 2.0;
    const ConformalChart chart{65, 65, 0.0, side, 0.0, side};
    const std::vector<GridPoint> loop{{0, 0}, {64, 0}, {64, 64}, {0, 64}, {0, 0}};
    double worst = 0.0;
    std::string detail;
    for (auto [c, u0, phi0, psi0] :
         {std::tuple{0, 0.0, cplx(1, 0), cplx(1, 0)}, std::tuple{-1, 0.0, cplx(1, 0), cplx(0, 0)},
          std::tuple{1, 0.0, cplx(0, 0), cplx(1, 0)}}) {
        const SurfaceData d = make_constant_solution(chart, c, u0, phi0, psi0);
        const auto pr = integrate_frame_path(d, loop, initial_frame(d, {0, 0}));
        worst = std::max(worst, pr.drift.max());
        detail += fmt("c=%+d: %.3e  ", c, pr.drift.max());
    }
    criterion(4, worst <= 1e-6,
              "frame invariants drift <= 1e-6 along a length-2pi path at step 2pi/256", detail);
}

// 5. Monodromy separation between compatible and incompatible data.
void criterion_5() {
    const ConformalChart chart{129, 129, 0.0, 1.0, 0.0, 1.0};
    const LoopRect loop{0, 0, 128, 128};
    const SurfaceData good = make_constant_solution(chart, 0, 0.0, 1.0, 1.0);
    const double dg = monodromy_defect(good, loop);
    SurfaceData bad(chart, SpaceForm(0), RealField(chart, 0.0),
                    ComplexField(chart, std::sqrt(1.1)), ComplexField(chart, 1.0));
    const double db = monodromy_defect(bad, loop);
    const bool pass = dg <= 1e-6 && db >= 1e-3 && db / dg >= 1e3;
    criterion(5, pass, "monodromy: compatible <= 1e-6, Gauss-violating >= 1e-3, 1e3x apart",
              fmt("good = %.3e, bad = %.3e, ratio = %.1e", dg, db, db / dg));
}

// 6. Associated family of the minimal constant solution.
void criterion_6() {
    const ConformalChart chart{64, 64, 0.0, 1.0, 0.0, 1.0};
    const SurfaceData d = make_constant_solution(chart, 1, 0.0, 0.0, 1.0);
    const auto before = integrability_residuals(d);
    bool pass = true;
    std::string detail;
    for (double t0 : {M_PI / 4.0, M_PI / 2.0, M_PI}) {
        const SurfaceData star = deform(d, RealField(chart, t0));
        const auto after = integrability_residuals(star);
        const double dnorm =
            std::max({std::abs(after.closedness_norms.linf - before.closedness_norms.linf),
                      std::abs(after.gauss_norms.linf - before.gauss_norms.linf),
                      std::abs(after.codazzi_norms.linf - before.codazzi_norms.linf)});
        bool bits = true;
        for (std::size_t i = 0; i < star.psi.size(); ++i) {
            const double a = std::abs(star.psi[i]);
            const double b = std::abs(d.psi[i]);
            if (std::memcmp(&a, &b, sizeof(double)) != 0) bits = false;
        }
        const bool noncong = !data_distance(d, star, 1e-8).congruent;
        pass = pass && after.pass(1e-12) && dnorm <= 1e-12 && bits && noncong;
        detail += fmt("t=%.2f: dnorm=%.1e bits=%d noncong=%d  ", t0, dnorm, bits, noncong);
    }
    criterion(6, pass, "associated family: residuals unchanged, |psi*| = |psi| bitwise, non-congruent",
              detail);
}

// 7. Pfaff closure on the 1/(z+zbar) profile, plus r_loglap/r_admis agreement.
void criterion_7() {
    const ConformalChart chart{64, 64, 1.0, 2.0, 0.0, 1.0};
    ComplexField psi = field_of(chart, [](cplx z) { return 1.0 / (z + std::conj(z)); });
    const SurfaceData d(chart, SpaceForm(0), RealField(chart, 0.0), ComplexField(chart), psi);
    const auto state = integrate_pfaff(d, 1.0, {0, 0});
    const auto adm = bonnet_admissibility(d);
    const double tol_h2 = 10.0 * chart.hx() * chart.hx();
    const bool verdicts_agree = (adm.n_loglap.linf <= tol_h2) == (adm.n_admis.linf <= tol_h2);
    const bool pass = state.closure_defect <= 1e-6 && verdicts_agree && adm.n_admis.linf <= tol_h2;
    criterion(7, pass, "Pfaff closure <= 1e-6 for psi = 1/(z+zbar), both admissibility routes agree",
              fmt("closure = %.3e, loglap = %.3e, admis = %.3e", state.closure_defect, adm.n_loglap.linf,
                  adm.n_admis.linf));
}

// 8. Pair algebra: round trip, equal moduli, holomorphic difference.
void criterion_8() {
    const ConformalChart chart{64, 64, -1.0, 1.0, -1.0, 1.0};
    ComplexField h = field_of(chart, [](cplx z) { return z; });
    RealField alpha(chart);
    for (int iy = 0; iy < chart.ny; ++iy)
        for (int ix = 0; ix < chart.nx; ++ix) alpha.at(ix, iy) = 0.5 + chart.x(ix);
    const auto [psi1, psi2] = pair_compose(h, alpha);
    const auto dec = pair_decompose(psi1, psi2);

    double round_h = 0.0, round_a = 0.0, moduli = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        round_h = std::max(round_h, std::abs(dec.h[i] - h[i]));
        if (dec.direct_mask[i]) round_a = std::max(round_a, std::abs(dec.alpha[i] - alpha[i]));
        moduli = std::max(moduli, std::abs(std::abs(psi1[i]) - std::abs(psi2[i])));
    }
    const bool pass = round_h <= 1e-12 && round_a <= 1e-12 && moduli <= 3e-16 &&
                      dec.h_cr_linf <= 1e-8;
    criterion(8, pass,
              "pair compose/decompose round trip <= 1e-12, moduli equal, cr(h) <= 1e-8",
              fmt("dh = %.1e, dalpha = %.1e, d|psi| = %.1e, cr = %.1e", round_h, round_a, moduli,
                  dec.h_cr_linf));
}

// 9. Umbilic indices and the genus-1 consistency verdict.
void criterion_9() {
    const ConformalChart chart{64, 64, -1.0, 1.0, -1.0, 1.0};
    const auto cube = umbilic_analysis(field_of(chart, [](cplx z) { return z * z * z; }));
    const bool cube_ok =
        cube.points.size() == 1 && cube.points[0].index == 3 && cube.degree == 3;

    const auto two =
        umbilic_analysis(field_of(chart, [](cplx z) { return z * (z - 0.5); }));
    const bool two_ok = two.degree == 2;

    const ConformalChart torus{64, 64, 0.0, 1.0, 0.0, 1.0, true, true};
    const auto flat = umbilic_analysis(ComplexField(torus, cplx(1.0, 0.0)));
    const bool torus_ok = flat.degree == 0 && flat.genus1_applicable && flat.genus1_consistent;

    criterion(9, cube_ok && two_ok && torus_ok,
              "umbilics: z^3 -> index 3; z(z-1/2) -> degree 2; torus psi=1 -> genus-1 consistent",
              fmt("z^3: n=%zu deg=%d; z(z-1/2): deg=%d; torus: deg=%d verdict=%d",
                  cube.points.size(), cube.degree, two.degree, flat.degree,
                  int(flat.genus1_consistent)));
}

// 10. Lawson-Tribuzy diagnostics on a constant-phase pair.
void criterion_10() {
    const ConformalChart chart{64, 64, 1.0, 2.0, 0.0, 1.0};
    ComplexField psi1 = field_of(chart, [](cplx z) { return z * z + 0.5; }); // holomorphic
    ComplexField psi2(chart);
    const double theta0 = 2.0;
    for (std::size_t i = 0; i < psi1.size(); ++i)
        psi2[i] = psi1[i] * std::exp(cplx(0.0, theta0));
    const double tol_h2 = 10.0 * chart.hx() * chart.hx();
    const auto lt = lt_diagnostics(psi1, psi2, RealField(chart, 0.0), tol_h2);
    const bool pass =
        lt.lap_arg_norms.linf <= tol_h2 && lt.lap_logabs_norms.linf <= tol_h2 && lt.branch_ok;
    criterion(10, pass, "LT diagnostics: constant-phase pair has harmonic arg Q and log|Q|",
              fmt("lap argQ = %.3e, lap log|Q| = %.3e, tol = %.1e", lt.lap_arg_norms.linf,
                  lt.lap_logabs_norms.linf, tol_h2));
}

// 11. The holomorphic-h ODE residual.
void criterion_11() {
    const ConformalChart chart{64, 64, 0.5, 1.5, -0.4, 0.4};
    SurfaceData d(chart, SpaceForm(0), RealField(chart, 0.0), ComplexField(chart),
                  field_of(chart, [](cplx z) { return 1.0 / (z + std::conj(z)); }));

    const auto b1 = h_structure_checks(d, field_of(chart, [](cplx z) { return z; }));
    const bool hz_ok = b1.n_hode.linf <= 1e-10;

    const auto b2 = h_structure_checks(d, field_of(chart, [](cplx z) { return z * z; }));
    double worst = 0.0;
    for (int iy = 2; iy < chart.ny - 2; ++iy) {
        for (int ix = 2; ix < chart.nx - 2; ++ix) {
            const cplx z = chart.z(ix, iy);
            const cplx expected = 4.0 * (std::conj(z) * std::conj(z) - z * z);
            worst = std::max(worst, std::abs(b2.r_hode.at(ix, iy) - expected));
        }
    }
    const double tol_h2 = 10.0 * chart.hx() * chart.hx();
    const bool pass = hz_ok && worst <= tol_h2;
    criterion(11, pass, "h-ODE: residual <= 1e-10 for h = z; h = z^2 matches 4(zbar^2 - z^2)",
              fmt("h=z: %.2e; h=z^2 vs symbolic: %.2e (tol %.1e)", b1.n_hode.linf, worst, tol_h2));
}

// 12. CLI contract: exit codes, report schema, fuzzed parse/emit round trip.
void criterion_12() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "lagsurf_acceptance";
    fs::create_directories(dir);
    auto file = [&](const char* n) { return (dir / n).string(); };

    // Keep the CLI's own stdout/stderr out of the acceptance log.
    auto quiet = [](const std::vector<std::string>& args) {
        std::stringstream sink;
        auto* out = std::cout.rdbuf(sink.rdbuf());
        auto* err = std::cerr.rdbuf(sink.rdbuf());
        const int code = run_command(args);
        std::cout.rdbuf(out);
        std::cerr.rdbuf(err);
        return code;
    };

    bool pass = true;
    std::string detail;

    const ConformalChart chart{16, 16, 0.0, 1.0, 0.0, 1.0};
    emit_surface_file(make_constant_solution(chart, 0, 0.0, 1.0, 1.0), file("ok.json"));
    const int code0 = quiet({"check", file("ok.json"), "--report", file("rep.json")});
    pass = pass && code0 == 0;

    SurfaceData bad(chart, SpaceForm(0), RealField(chart, 0.0), ComplexField(chart, std::sqrt(1.1)),
                    ComplexField(chart, 1.0));
    emit_surface_file(bad, file("bad.json"));
    const int code1 = quiet({"check", file("bad.json")});
    pass = pass && code1 == 1;

    const int code2 = quiet({"pair", file("ok.json"), file("ok.json")});
    pass = pass && code2 == 2;

    // A failing reconstruction gate is a verdict failure, not an input error.
    const int code3 = quiet({"reconstruct", file("bad.json")});
    pass = pass && code3 == 1;
    detail += fmt("exit codes: %d/%d/%d/%d  ", code0, code1, code2, code3);

    // Report schema: required keys present in the emitted JSON.
    const Report rep = parse_report_file(file("rep.json"));
    std::ifstream in(file("rep.json"));
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    for (const char* key : {"\"command\"", "\"input\"", "\"tolerance\"", "\"norms\"",
                            "\"verdicts\"", "\"exit\"", "\"linf\"", "\"l2\""}) {
        if (text.find(key) == std::string::npos) pass = false;
    }
    pass = pass && rep.command == "check" && rep.exit_code == 0;

    // Fuzzed corpus of 100 files: emit -> parse is bit-exact.
    std::mt19937_64 rng(991);
    std::uniform_real_distribution<double> val(-5.0, 5.0);
    std::uniform_int_distribution<int> ngrid(4, 10);
    std::uniform_int_distribution<int> cpick(-1, 1);
    std::uniform_int_distribution<int> special(0, 9);
    int exact = 0;
    for (int iter = 0; iter < 100; ++iter) {
        ConformalChart cc;
        cc.nx = ngrid(rng);
        cc.ny = ngrid(rng);
        cc.x_min = val(rng);
        cc.x_max = cc.x_min + 1.0 + std::abs(val(rng));
        cc.y_min = val(rng);
        cc.y_max = cc.y_min + 1.0 + std::abs(val(rng));
        RealField u(cc);
        ComplexField phi(cc), psi(cc);
        auto draw = [&]() -> double {
            switch (special(rng)) {
            case 0: return -0.0;
            case 1: return 1e308 * 0.5;
            case 2: return 5e-324;
            default: return val(rng);
            }
        };
        for (std::size_t i = 0; i < cc.size(); ++i) {
            u[i] = draw();
            phi[i] = cplx(draw(), draw());
            psi[i] = cplx(draw(), draw());
        }
        const SurfaceData d(cc, SpaceForm(cpick(rng)), u, phi, psi);
        const SurfaceData back = parse_surface_text(emit_surface_text(d));
        bool same = back.chart == cc;
        same = same && std::memcmp(back.u.raw().data(), d.u.raw().data(),
                                   cc.size() * sizeof(double)) == 0;
        same = same && std::memcmp(back.phi.raw().data(), d.phi.raw().data(),
                                   cc.size() * sizeof(cplx)) == 0;
        same = same && std::memcmp(back.psi.raw().data(), d.psi.raw().data(),
                                   cc.size() * sizeof(cplx)) == 0;
        if (same) ++exact;
    }
    pass = pass && exact == 100;
    detail += fmt("fuzz round trips: %d/100", exact);
    criterion(12, pass, "CLI exit codes, report schema, bit-exact parse/emit on fuzz corpus",
              detail);
    fs::remove_all(dir);
}

} // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    if (g_failures == 0)
        std::printf("all 12 criteria passed\n");
    else
        std::printf("%d criteria FAILED\n", g_failures);
    return g_failures;
}
