#include <doctest.h>

#include "lagsurf/catalog.hpp"
#include "lagsurf/extraction.hpp"
#include "test_support.hpp"

using namespace lagsurf;
using namespace lagsurf::testing;

namespace {

Immersion plane_immersion(const ConformalChart& c) {
    Immersion imm;
    imm.chart = c;
    imm.c = 0;
    imm.points.resize(c.size());
    for (int iy = 0; iy < c.ny; ++iy)
        for (int ix = 0; ix < c.nx; ++ix)
            imm.points[c.idx(ix, iy)] = {std::sqrt(2.0) * c.x(ix), 0.0, std::sqrt(2.0) * c.y(iy),
                                         0.0};
    return imm;
}

} // namespace

TEST_CASE("extraction: plane immersion gives u = 0, phi = 0, psi = 0") {
    const auto c = unit_chart(16);
    const auto res = extract_data(plane_immersion(c));
    CHECK(field_norms(res.data.u, 0).linf < 1e-13);
    CHECK(field_norms(res.data.phi, 0).linf < 1e-13);
    CHECK(field_norms(res.data.psi, 0).linf < 1e-13);
    CHECK(res.conformality_norms.linf < 1e-13);
    CHECK(res.lagrangian_norms.linf < 1e-13);
}

TEST_CASE("round trip: constant c=0 data on a 128x128 unit chart") {
    const auto c = unit_chart(128);
    const SurfaceData d = make_constant_solution(c, 0, 0.0, 1.0, 1.0);
    const auto rec = reconstruct_grid(d, {0, 0});
    const auto ext = extract_data(rec.immersion);
    const auto dist = data_distance(ext.data, d, 1e-4);
    CAPTURE(dist.du);
    CAPTURE(dist.dphi);
    CAPTURE(dist.dpsi);
    CHECK(dist.du <= 1e-4);
    CHECK(dist.dphi <= 1e-4);
    CHECK(dist.dpsi <= 1e-4);
    CHECK(dist.congruent);
}

TEST_CASE("round trip: lift branch for c = +1 and c = -1") {
    const auto c = unit_chart(96);
    for (int cc : {1, -1}) {
        const SurfaceData d = (cc == 1) ? make_constant_solution(c, 1, 0.0, 0.0, 1.0)
                                        : make_constant_solution(c, -1, 0.0, 1.0, 0.0);
        const auto rec = reconstruct_grid(d, {0, 0});
        const auto ext = extract_data(rec.immersion);
        const auto dist = data_distance(ext.data, d, 1e-4);
        CAPTURE(cc);
        CAPTURE(dist.du);
        CAPTURE(dist.dphi);
        CAPTURE(dist.dpsi);
        CHECK(dist.congruent);
    }
}

TEST_CASE("round trip: smooth nonconstant data (c=0 Bonnet profile)") {
    const auto c = chart_on(96, 1.0, 2.0, 0.0, 1.0);
    const SurfaceData d = bonnet_profile_c0(c);
    ReconstructOptions opts;
    opts.tol = 1e-2; // sampled analytic data passes at the h^2 class
    const auto rec = reconstruct_grid(d, {0, 0}, opts);
    const auto ext = extract_data(rec.immersion);
    const auto dist = data_distance(ext.data, d, 5e-4);
    CAPTURE(dist.du);
    CAPTURE(dist.dphi);
    CAPTURE(dist.dpsi);
    CHECK(dist.congruent);
}

TEST_CASE("non-Lagrangian surface is flagged: f = (x + iy, y)") {
    const auto c = unit_chart(24);
    Immersion imm;
    imm.chart = c;
    imm.c = 0;
    imm.points.resize(c.size());
    for (int iy = 0; iy < c.ny; ++iy)
        for (int ix = 0; ix < c.nx; ++ix)
            imm.points[c.idx(ix, iy)] = {c.x(ix), c.y(iy), c.y(iy), 0.0};
    const auto res = extract_data(imm);
    // Direct evaluation: <f_z, J f_zbar> = -i/2 everywhere.
    for (int iy = 2; iy < c.ny - 2; ++iy)
        for (int ix = 2; ix < c.nx - 2; ++ix)
            CHECK(res.lagrangian_residual.at(ix, iy) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("degenerate metric is rejected") {
    const auto c = unit_chart(16);
    Immersion imm;
    imm.chart = c;
    imm.c = 0;
    imm.points.assign(c.size(), {0.0, 0.0, 0.0, 0.0}); // collapsed surface
    CHECK_THROWS_AS(extract_data(imm), InputError);
}

TEST_CASE("extraction is invariant under ambient U(2) isometries (c=0)") {
    const auto c = unit_chart(48);
    const SurfaceData d = make_constant_solution(c, 0, 0.0, 1.0, 1.0);
    const auto rec = reconstruct_grid(d, {0, 0});
    const auto base = extract_data(rec.immersion);

    // U(2) element as a real 4x4 commuting with J, plus a translation.
    MatC<2> A;
    A(0, 0) = cplx(0.0, 0.9);
    A(0, 1) = cplx(0.45, -0.15);
    A(1, 0) = cplx(-0.45, -0.15);
    A(1, 1) = cplx(0.0, -0.3);
    const MatC<2> Q = matexp<2>(A);
    Mat4c U4;
    for (int br = 0; br < 2; ++br)
        for (int bc = 0; bc < 2; ++bc) {
            const cplx e = Q(br, bc);
            U4(2 * br, 2 * bc) = e.real();
            U4(2 * br, 2 * bc + 1) = -e.imag();
            U4(2 * br + 1, 2 * bc) = e.imag();
            U4(2 * br + 1, 2 * bc + 1) = e.real();
        }

    Immersion moved = rec.immersion;
    for (auto& p : moved.points) {
        Vec4c v;
        for (int k = 0; k < 4; ++k) v[k] = p[k];
        const Vec4c w = U4 * v;
        for (int k = 0; k < 4; ++k) p[k] = w[k].real() + (k == 0 ? 2.5 : 0.0);
    }
    const auto ext = extract_data(moved);
    CHECK(max_diff(ext.data.u, base.data.u) < 1e-11);
    CHECK(max_diff(ext.data.phi, base.data.phi) < 1e-11);
    CHECK(max_diff(ext.data.psi, base.data.psi) < 1e-11);
}

TEST_CASE("extraction is invariant under U(1,2) for c = -1") {
    const auto c = unit_chart(32);
    const SurfaceData d = make_constant_solution(c, -1, 0.0, 1.0, 0.0);
    const auto rec = reconstruct_grid(d, {0, 0});
    const auto base = extract_data(rec.immersion);

    Mat3c H;
    H(0, 0) = 0.4;
    H(1, 1) = -0.1;
    H(2, 2) = 0.2;
    H(0, 1) = cplx(0.15, 0.2);
    H(1, 0) = cplx(0.15, -0.2);
    Mat3c eps = Mat3c::identity();
    eps(0, 0) = -1.0;
    const Mat3c U = matexp<3>((eps * H) * cplx(0.0, 1.0));

    Immersion moved = rec.immersion;
    for (std::size_t i = 0; i < moved.lift.size(); ++i) {
        moved.lift[i] = U * moved.lift[i];
        moved.projective[i] = hopf_project(moved.lift[i], -1);
    }
    const auto ext = extract_data(moved);
    CHECK(max_diff(ext.data.u, base.data.u) < 1e-10);
    CHECK(max_diff(ext.data.phi, base.data.phi) < 1e-10);
    CHECK(max_diff(ext.data.psi, base.data.psi) < 1e-10);
}

TEST_CASE("data_distance: identity, bonnet pair, chart mismatch") {
    const auto c = unit_chart(16);
    const SurfaceData d = make_constant_solution(c, 0, 0.0, 1.0, 1.0);
    auto self = data_distance(d, d, 1e-12);
    CHECK(self.du == 0.0);
    CHECK(self.dphi == 0.0);
    CHECK(self.dpsi == 0.0);
    CHECK(self.congruent);

    // psi_2 = e^{i pi/2} psi_1 with |psi_1| = 1: d psi = |i - 1| = sqrt(2).
    SurfaceData d2 = d;
    for (std::size_t i = 0; i < d2.psi.size(); ++i) d2.psi[i] *= cplx(0.0, 1.0);
    const auto dist = data_distance(d, d2, 1e-8);
    CHECK(dist.dpsi == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK_FALSE(dist.congruent);

    const auto c2 = unit_chart(18);
    const SurfaceData other = make_constant_solution(c2, 0, 0.0, 1.0, 1.0);
    CHECK_THROWS_AS(data_distance(d, other, 1e-8), InputError);
}
