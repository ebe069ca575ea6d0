#include <doctest.h>

#include "lagsurf/catalog.hpp"
#include "lagsurf/integrability.hpp"
#include "test_support.hpp"

using namespace lagsurf;
using namespace lagsurf::testing;

TEST_CASE("constant solutions have vanishing residuals") {
    const auto c = unit_chart(32);
    for (auto [cc, u0, phi0, psi0] :
         {std::tuple{0, 0.0, cplx(1, 0), cplx(1, 0)}, std::tuple{-1, 0.0, cplx(1, 0), cplx(0, 0)},
          std::tuple{1, 0.0, cplx(0, 0), cplx(1, 0)}}) {
        const SurfaceData d = make_constant_solution(c, cc, u0, phi0, psi0);
        const auto r = integrability_residuals(d);
        CHECK(r.max_linf() < 1e-12);
        CHECK(r.pass(1e-12));
    }
}

TEST_CASE("codazzi residual of psi = 1 + eps zbar is exactly eps") {
    // Symbolic substitution: e^{-2u} psi_zbar = eps with u = 0, and the
    // (e^{-u} phi)_z side stays zero for constant phi.
    const double eps = 1e-3;
    const auto c = unit_chart(32);
    const auto psi = make_complex_field(c, [eps](cplx z) { return 1.0 + eps * std::conj(z); });
    SurfaceData d(c, SpaceForm(0), RealField(c, 0.0), ComplexField(c, 1.0), psi);
    const auto r = integrability_residuals(d);
    double m = 0.0;
    for (std::size_t i = 0; i < r.codazzi.size(); ++i)
        m = std::max(m, std::abs(r.codazzi[i] - eps));
    CHECK(m < 1e-12);
    CHECK(r.closedness_norms.linf < 1e-12);
    // Gauss picks up the |psi|^2 change: 1 - |1 + eps zbar|^2 = O(eps).
    CHECK(r.gauss_norms.linf < 3.0 * eps);
}

TEST_CASE("residual fields converge to the symbolic residual at O(h^2)") {
    // Non-solution closed-form data; symbolic residuals computed by hand:
    //   phi = x y        -> closedness = i x
    //   u = x^2, psi = 0 -> gauss = u_{z zbar} + |phi|^2 + c e^u = 1/2 + x^2 y^2 + e^{x^2} (c=1)
    //   codazzi = -(e^{-u} phi)_z
    auto run = [](int n) {
        const auto c = chart_on(n, 0, 1, 0, 1);
        const auto u = make_real_field(c, [](double x, double) { return x * x; });
        const auto phi =
            make_complex_field(c, [](cplx z) { return cplx(z.real() * z.imag(), 0.0); });
        SurfaceData d(c, SpaceForm(1), u, phi, ComplexField(c));
        const auto r = integrability_residuals(d);
        double worst = 0.0;
        for (int iy = 1; iy < c.ny - 1; ++iy) {
            for (int ix = 1; ix < c.nx - 1; ++ix) {
                const double x = c.x(ix), y = c.y(iy);
                const cplx closed_sym(0.0, x);
                const double gauss_sym = 0.5 + x * x * y * y + std::exp(x * x);
                // (e^{-x^2} x y)_z = y/2 (1 - 2x^2) e^{-x^2} - i x/2 e^{-x^2} x... derivative in z:
                // d_z = (d_x - i d_y)/2 of e^{-x^2} x y.
                const double fx = y * (1.0 - 2.0 * x * x) * std::exp(-x * x);
                const double fy = x * std::exp(-x * x);
                const cplx codazzi_sym = -0.5 * cplx(fx, -fy);
                worst = std::max(worst, std::abs(r.closedness.at(ix, iy) - closed_sym));
                worst = std::max(worst, std::abs(r.gauss.at(ix, iy) - gauss_sym));
                worst = std::max(worst, std::abs(r.codazzi.at(ix, iy) - codazzi_sym));
            }
        }
        return worst;
    };
    const double e32 = run(32), e64 = run(64);
    CHECK(e32 / e64 > 3.3);
    CHECK(e32 / e64 < 4.7);
}

TEST_CASE("classify: minimal data") {
    const auto c = unit_chart(16);
    SurfaceData d(c, SpaceForm(1), RealField(c, 0.0), ComplexField(c, 0.0), ComplexField(c, 1.0));
    const auto cls = classify(d, 1e-8);
    CHECK(cls.minimal);
    CHECK(cls.minimal_residual == 0.0);
    CHECK(cls.hamiltonian_stationary);
    CHECK(cls.conformal_maslov);
}

TEST_CASE("classify: phi = z is hamiltonian stationary but not conformal-Maslov") {
    const auto c = chart_on(32, -1, 1, -1, 1);
    const auto phi = make_complex_field(c, [](cplx z) { return z; });
    SurfaceData d(c, SpaceForm(0), RealField(c, 0.0), phi, ComplexField(c));
    const auto cls = classify(d, 1e-6);
    CHECK(cls.hamiltonian_stationary);
    CHECK_FALSE(cls.conformal_maslov);
    CHECK(cls.conformal_maslov_residual == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_FALSE(cls.minimal);
}

TEST_CASE("classify: phi = g e^u with constant g and u = x^2") {
    // (e^{-u} phi)_z = g_z = 0, so the Maslov form is conformal, while
    // phi_zbar = g (e^{x^2})_zbar = g x e^{x^2} != 0.
    const auto c = chart_on(32, 0.1, 1, 0, 1);
    const cplx g(1.0, 2.0);
    const auto u = make_real_field(c, [](double x, double) { return x * x; });
    const auto phi = make_complex_field(c, [g](cplx z) {
        return g * std::exp(z.real() * z.real());
    });
    SurfaceData d(c, SpaceForm(0), u, phi, ComplexField(c));
    const auto cls = classify(d, 1e-6);
    CHECK(cls.conformal_maslov);
    CHECK_FALSE(cls.hamiltonian_stationary);
    // Symbolic oracle on u = x^2: phi_zbar = g x e^{x^2}, max over the
    // interior-norm mask (margin 2 on open axes).
    double expected = 0.0;
    for (int iy = 2; iy < c.ny - 2; ++iy)
        for (int ix = 2; ix < c.nx - 2; ++ix)
            expected = std::max(expected,
                                std::abs(g) * c.x(ix) * std::exp(c.x(ix) * c.x(ix)));
    CHECK(cls.hamiltonian_residual == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("codazzi transfers the conformal-Maslov residual to psi holomorphy") {
    // On data passing integrability, ||(e^{-u} phi)_z|| = ||e^{-2u} psi_zbar||
    // within twice the integrability tolerance.
    const auto c = chart_on(48, 1.0, 2.0, 0.0, 1.0);
    const SurfaceData d = bonnet_profile_c0(c);
    const auto r = integrability_residuals(d);
    const double tau = r.max_linf();
    const auto cls = classify(d, 1e-8);
    CHECK(std::abs(cls.conformal_maslov_residual - cls.psi_holomorphy_cross) <= 2.0 * tau);
    CHECK(cls.conformal_maslov_residual > 10.0 * tau); // residual is genuinely nonzero
}
