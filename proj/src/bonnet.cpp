#include "lagsurf/bonnet.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "lagsurf/exec.hpp"
#include "lagsurf/integrability.hpp"

namespace lagsurf {

namespace {

const cplx kI(0.0, 1.0);

double median_abs(const ComplexField& f) {
    std::vector<double> a(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) a[i] = std::abs(f[i]);
    auto mid = a.begin() + a.size() / 2;
    std::nth_element(a.begin(), mid, a.end());
    return *mid;
}

double median_abs(const RealField& f) {
    std::vector<double> a(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) a[i] = std::abs(f[i]);
    auto mid = a.begin() + a.size() / 2;
    std::nth_element(a.begin(), mid, a.end());
    return *mid;
}

double wrap_to_pi(double x) {
    x = std::fmod(x + M_PI, 2.0 * M_PI);
    if (x < 0) x += 2.0 * M_PI;
    return x - M_PI;
}

// h^2-scaled default tolerance: C * h^2 with C = 10.
double h2_tolerance(const ConformalChart& chart) {
    const double h = std::max(chart.hx(), chart.hy());
    return 10.0 * h * h;
}

} // namespace

AdmissibilityBundle bonnet_admissibility(const SurfaceData& data, double floor_rel) {
    const ConformalChart& chart = data.chart;
    const double med = median_abs(data.psi);
    const double floor_abs = floor_rel * (med > 0.0 ? med : field_norms(abs_field(data.psi), 0).linf);
    if (floor_abs <= 0.0)
        throw InputError(InputError::Code::ZeroField, "bonnet_admissibility: psi vanishes identically");

    std::vector<std::uint8_t> m0(chart.size());
    std::size_t kept = 0;
    for (std::size_t i = 0; i < chart.size(); ++i) {
        m0[i] = std::abs(data.psi[i]) > floor_abs;
        kept += m0[i];
    }
    if (kept == 0)
        throw InputError(InputError::Code::ZeroField, "bonnet_admissibility: evaluation mask is empty");

    ComplexField psi_z = derivative(data.psi, Wirtinger::Dz);
    ComplexField psi_zbar = derivative(data.psi, Wirtinger::Dzbar);

    // L = (log psi)_zbar = psi_zbar / psi, single-valued off the zero set.
    ComplexField L(chart), L18(chart), inv_psi(chart), alpha_z(chart);
    parallel_for(chart.size(), [&](std::size_t i) {
        if (!m0[i]) return;
        L[i] = psi_zbar[i] / data.psi[i];
        L18[i] = psi_zbar[i] / std::norm(data.psi[i]);
        inv_psi[i] = 1.0 / data.psi[i];
        const cplx psibar_z = std::conj(psi_zbar[i]);
        alpha_z[i] = (psi_z[i] / data.psi[i] - psibar_z / std::conj(data.psi[i])) / (2.0 * kI);
    });

    ComplexField L_z = derivative(L, Wirtinger::Dz);
    ComplexField L18_z = derivative(L18, Wirtinger::Dz);
    ComplexField alpha_zz = derivative(alpha_z, Wirtinger::Dzbar);
    ComplexField invpsi_zz = second_zzbar(inv_psi);

    AdmissibilityBundle b;
    b.r_loglap = ComplexField(chart);
    b.r_admis = std::move(L18_z);
    b.r_ratio = ComplexField(chart);
    b.r_loggauss = RealField(chart);
    b.r_arglap = RealField(chart);
    b.r_iso = RealField(chart);
    b.r_invpsi = std::move(invpsi_zz);
    parallel_for(chart.size(), [&](std::size_t i) {
        b.r_loglap[i] = L_z[i] - std::norm(L[i]);
        b.r_iso[i] = L_z[i].imag();
        b.r_arglap[i] = alpha_zz[i].real();
    });

    // The Gauss-side residuals need the denominator D = |phi|^2 + e^u(c-K)
    // (equal to e^{-2u}|psi|^2 on solutions) and the positive log argument
    // X = e^{3u}(e^{-u}|phi|^2 + c - K).
    RealField K = gauss_curvature(data);
    ComplexField cm = conformal_maslov_field(data); // (e^{-u} phi)_z
    RealField D(chart), X(chart);
    const double c = data.c();
    parallel_for(chart.size(), [&](std::size_t i) {
        const double eu = std::exp(data.u[i]);
        D[i] = std::norm(data.phi[i]) + eu * (c - K[i]);
        X[i] = std::exp(3.0 * data.u[i]) * (std::norm(data.phi[i]) / eu + c - K[i]);
    });
    const double medD = median_abs(D);
    std::vector<std::uint8_t> mg(chart.size());
    for (std::size_t i = 0; i < chart.size(); ++i)
        mg[i] = m0[i] && std::abs(D[i]) > 1e-6 * medD && X[i] > 0.0;

    ComplexField ratio19(chart);
    RealField logX(chart);
    parallel_for(chart.size(), [&](std::size_t i) {
        if (!mg[i]) return;
        ratio19[i] = cm[i] / D[i];
        logX[i] = std::log(X[i]);
    });
    b.r_ratio = derivative(ratio19, Wirtinger::Dz);
    ComplexField logX_zz = second_zzbar(logX);
    parallel_for(chart.size(), [&](std::size_t i) {
        if (!mg[i]) return;
        const double eu = std::exp(data.u[i]);
        const double denom = std::norm(data.phi[i]) / eu + c - K[i];
        b.r_loggauss[i] = logX_zz[i].real() - 2.0 * eu * std::norm(cm[i]) / denom;
    });

    b.mask = erode_mask(chart, m0, 2);
    // r_ratio stacks three derivative layers through K and r_loggauss four; the O(h)
    // seam of the nested second derivative propagates one ring per extra
    // layer, so these norms need a deeper margin.
    b.mask_gauss = erode_mask(chart, mg, 4);
    b.n_loglap = field_norms_masked(b.r_loglap, b.mask);
    b.n_admis = field_norms_masked(b.r_admis, b.mask);
    b.n_ratio = field_norms_masked(b.r_ratio, b.mask_gauss);
    b.n_loggauss = field_norms_masked(b.r_loggauss, b.mask_gauss);
    b.n_arglap = field_norms_masked(b.r_arglap, b.mask);
    b.n_iso = field_norms_masked(b.r_iso, b.mask);
    b.n_invpsi = field_norms_masked(b.r_invpsi, b.mask);
    return b;
}

namespace {

// Row-then-column sweep visiting every node once. step(a, b, dir) must
// update the value at node b from the finished node a.
template <class Step>
void sweep_tree(const ConformalChart& chart, GridPoint base, const Step& step) {
    for (int ix = base.ix + 1; ix < chart.nx; ++ix)
        step(GridPoint{ix - 1, base.iy}, GridPoint{ix, base.iy});
    for (int ix = base.ix - 1; ix >= 0; --ix)
        step(GridPoint{ix + 1, base.iy}, GridPoint{ix, base.iy});
    parallel_for(static_cast<std::size_t>(chart.nx), [&](std::size_t col) {
        const int ix = static_cast<int>(col);
        for (int iy = base.iy + 1; iy < chart.ny; ++iy)
            step(GridPoint{ix, iy - 1}, GridPoint{ix, iy});
        for (int iy = base.iy - 1; iy >= 0; --iy)
            step(GridPoint{ix, iy + 1}, GridPoint{ix, iy});
    });
}

// Interpolate a complex line sample at the midpoint of a -> b.
cplx interp_mid(const ComplexField& f, GridPoint a, GridPoint b, CoeffInterp interp) {
    const ConformalChart& chart = f.chart();
    const cplx fa = f.at(a.ix, a.iy), fb = f.at(b.ix, b.iy);
    if (interp == CoeffInterp::Linear) return 0.5 * (fa + fb);
    const int sx = b.ix - a.ix, sy = b.iy - a.iy;
    auto fetch = [&](int ix, int iy, bool& ok) -> cplx {
        if (chart.periodic_x) ix = (ix % chart.nx + chart.nx) % chart.nx;
        if (chart.periodic_y) iy = (iy % chart.ny + chart.ny) % chart.ny;
        ok = ix >= 0 && ix < chart.nx && iy >= 0 && iy < chart.ny;
        return ok ? f.at(ix, iy) : cplx{};
    };
    bool okm = false, okp = false, okp2 = false;
    const cplx fm = fetch(a.ix - sx, a.iy - sy, okm);
    const cplx fp = fetch(b.ix + sx, b.iy + sy, okp);
    const cplx fp2 = fetch(b.ix + 2 * sx, b.iy + 2 * sy, okp2);
    if (okm && okp) return (-fm + 9.0 * fa + 9.0 * fb - fp) / 16.0;
    if (okp && okp2) return 0.3125 * fa + 0.9375 * fb - 0.3125 * fp + 0.0625 * fp2;
    if (okm) {
        bool okm2 = false;
        const cplx fm2 = fetch(a.ix - 2 * sx, a.iy - 2 * sy, okm2);
        if (okm2) return 0.3125 * fb + 0.9375 * fa - 0.3125 * fm + 0.0625 * fm2;
    }
    return 0.5 * (fa + fb);
}

// Right-hand side of the deformation parameter along a unit grid direction:
//   d t/dx = -2 Im[(1 - e^{-it}) w],  d t/dy = 2 Re[(1 - e^{-it}) w],
// with w = psi_zbar / psi.
double pfaff_rhs(double t, cplx w, bool along_x) {
    const cplx W = (1.0 - std::exp(-kI * t)) * w;
    return along_x ? -2.0 * W.imag() : 2.0 * W.real();
}

double pfaff_rk4_step(double t, cplx w0, cplx wm, cplx w1, double h, bool along_x) {
    const double k1 = pfaff_rhs(t, w0, along_x);
    const double k2 = pfaff_rhs(t + 0.5 * h * k1, wm, along_x);
    const double k3 = pfaff_rhs(t + 0.5 * h * k2, wm, along_x);
    const double k4 = pfaff_rhs(t + h * k3, w1, along_x);
    return t + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace

DeformationState integrate_pfaff(const SurfaceData& data, double t0, GridPoint base,
                                 double admissibility_tol, CoeffInterp interp) {
    const ConformalChart& chart = data.chart;
    if (base.ix < 0 || base.ix >= chart.nx || base.iy < 0 || base.iy >= chart.ny)
        throw InputError(InputError::Code::PathOffChart, "pfaff base outside chart");

    const double tol = admissibility_tol > 0 ? admissibility_tol : h2_tolerance(chart);
    const AdmissibilityBundle adm = bonnet_admissibility(data);
    if (adm.n_admis.linf > tol)
        throw VerdictError("integrate_pfaff: data is not Bonnet-admissible, ||r_admis|| = " +
                           std::to_string(adm.n_admis.linf));

    const double med = median_abs(data.psi);
    for (std::size_t i = 0; i < chart.size(); ++i)
        if (std::abs(data.psi[i]) <= 1e-6 * med)
            throw InputError(InputError::Code::ZeroField,
                             "integrate_pfaff: psi vanishes on the integration tree");

    ComplexField psi_zbar = derivative(data.psi, Wirtinger::Dzbar);
    ComplexField w(chart);
    parallel_for(chart.size(), [&](std::size_t i) { w[i] = psi_zbar[i] / data.psi[i]; });

    RealField t(chart);
    t.at(base.ix, base.iy) = t0;
    auto step = [&](GridPoint a, GridPoint b) {
        const bool along_x = (a.iy == b.iy);
        const double h = along_x ? (b.ix - a.ix) * chart.hx() : (b.iy - a.iy) * chart.hy();
        const cplx w0 = w.at(a.ix, a.iy);
        const cplx w1 = w.at(b.ix, b.iy);
        const cplx wm = interp_mid(w, a, b, interp);
        t.at(b.ix, b.iy) = pfaff_rk4_step(t.at(a.ix, a.iy), w0, wm, w1, h, along_x);
    };
    sweep_tree(chart, base, step);

    // Plaquette closure over interior cells: all four corners must use the
    // central stencil of w (one-sided boundary values of psi_zbar carry an
    // O(h^2) jump that would dominate the loop test).
    std::vector<double> defect(chart.size(), 0.0);
    parallel_for(chart.size(), [&](std::size_t i) {
        const int ix = static_cast<int>(i) % chart.nx;
        const int iy = static_cast<int>(i) / chart.nx;
        const int x_lo = chart.periodic_x ? 0 : 1;
        const int x_hi = chart.periodic_x ? chart.nx - 1 : chart.nx - 2;
        const int y_lo = chart.periodic_y ? 0 : 1;
        const int y_hi = chart.periodic_y ? chart.ny - 1 : chart.ny - 2;
        if (ix < x_lo || ix >= x_hi || iy < y_lo || iy >= y_hi) return;
        const GridPoint p00{ix, iy}, p10{ix + 1, iy}, p11{ix + 1, iy + 1}, p01{ix, iy + 1};
        auto leg = [&](double tcur, GridPoint a, GridPoint b) {
            const bool along_x = (a.iy == b.iy);
            const double h = along_x ? (b.ix - a.ix) * chart.hx() : (b.iy - a.iy) * chart.hy();
            return pfaff_rk4_step(tcur, w.at(a.ix, a.iy), interp_mid(w, a, b, interp),
                                  w.at(b.ix, b.iy), h, along_x);
        };
        double tc = t[i];
        tc = leg(tc, p00, p10);
        tc = leg(tc, p10, p11);
        tc = leg(tc, p11, p01);
        tc = leg(tc, p01, p00);
        defect[i] = std::abs(wrap_to_pi(tc - t[i]));
    });

    DeformationState state{std::move(t), det_max_abs(defect)};
    return state;
}

SurfaceData deform(const SurfaceData& data, const RealField& t) {
    require_same_chart(data.chart, t.chart(), "deform");
    ComplexField psi(data.chart);
    parallel_for(psi.size(), [&](std::size_t i) {
        psi[i] = cplx(std::cos(t[i]), std::sin(t[i])) * data.psi[i];
    });
    return SurfaceData(data.chart, data.form, data.u, data.phi, std::move(psi));
}

SurfaceData deform(const SurfaceData& data, const DeformationState& state) {
    return deform(data, state.t);
}

CompletionResult holomorphic_completion(const RealField& r, GridPoint base, double harmonic_tol) {
    const ConformalChart& chart = r.chart();
    chart.validate();
    require_finite(r, "holomorphic_completion input");
    const double tol = harmonic_tol > 0 ? harmonic_tol : h2_tolerance(chart) * (1.0 + field_norms(r, 0).linf);

    CompletionResult res;
    res.harmonic_residual_linf = field_norms(real_part(second_zzbar(r))).linf;
    if (res.harmonic_residual_linf > tol)
        throw InputError(InputError::Code::NotHarmonic,
                         "holomorphic_completion: input not harmonic, ||r_{z zbar}|| = " +
                             std::to_string(res.harmonic_residual_linf));

    // ds = -r_y dx + r_x dy, from r_z = (r_x - i r_y)/2.
    ComplexField rz = derivative(r, Wirtinger::Dz);
    RealField gx(chart), gy(chart); // integrands along x resp. y edges
    parallel_for(chart.size(), [&](std::size_t i) {
        gx[i] = 2.0 * rz[i].imag();  // -r_y
        gy[i] = 2.0 * rz[i].real();  //  r_x
    });

    auto check_period = [&](bool along_x) {
        double period = 0.0;
        if (along_x) {
            for (int ix = 0; ix < chart.nx; ++ix) {
                const int jx = (ix + 1) % chart.nx;
                period += 0.5 * (gx.at(ix, base.iy) + gx.at(jx, base.iy)) * chart.hx();
            }
        } else {
            for (int iy = 0; iy < chart.ny; ++iy) {
                const int jy = (iy + 1) % chart.ny;
                period += 0.5 * (gy.at(base.ix, iy) + gy.at(base.ix, jy)) * chart.hy();
            }
        }
        if (std::abs(period) > tol)
            throw InputError(InputError::Code::Period,
                             "holomorphic_completion: nonzero period " + std::to_string(period) +
                                 " around the periodic axis, conjugate is multivalued");
    };
    if (chart.periodic_x) check_period(true);
    if (chart.periodic_y) check_period(false);

    RealField s(chart);
    auto step = [&](GridPoint a, GridPoint b) {
        const bool along_x = (a.iy == b.iy);
        const double h = along_x ? (b.ix - a.ix) * chart.hx() : (b.iy - a.iy) * chart.hy();
        const RealField& g = along_x ? gx : gy;
        s.at(b.ix, b.iy) =
            s.at(a.ix, a.iy) + 0.5 * (g.at(a.ix, a.iy) + g.at(b.ix, b.iy)) * h;
    };
    sweep_tree(chart, base, step);

    res.h = ComplexField(chart);
    parallel_for(chart.size(), [&](std::size_t i) { res.h[i] = 0.5 * cplx(r[i], s[i]); });
    res.cr_linf = cr_residual(res.h).norms.linf;
    return res;
}

HStructureBundle h_structure_checks(const SurfaceData& data, const ComplexField& h,
                                    double floor_rel) {
    const ConformalChart& chart = data.chart;
    require_same_chart(chart, h.chart(), "h_structure_checks");

    ComplexField hz = derivative(h, Wirtinger::Dz);
    ComplexField hzz = derivative(hz, Wirtinger::Dz);
    RealField hsum(chart); // h + conj h
    parallel_for(chart.size(), [&](std::size_t i) { hsum[i] = 2.0 * h[i].real(); });

    const double med = median_abs(hsum);
    std::vector<std::uint8_t> m(chart.size());
    for (std::size_t i = 0; i < chart.size(); ++i) m[i] = hsum[i] > floor_rel * med;

    double hz_max = 0.0, hz_min_on_mask = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < chart.size(); ++i) {
        hz_max = std::max(hz_max, std::abs(hz[i]));
        if (m[i]) hz_min_on_mask = std::min(hz_min_on_mask, std::abs(hz[i]));
    }
    if (!(hz_min_on_mask > 1e-10 * hz_max))
        throw InputError(InputError::Code::DegenerateMetric,
                         "h_structure_checks: h_z vanishes on the mask, w-coordinate is singular");

    HStructureBundle b;
    b.r24_direct = RealField(chart);
    b.r24_h = RealField(chart);
    b.tonly_mean_curv = RealField(chart);
    b.tonly_e2u_over_hz = RealField(chart);
    b.tonly_psi_ratio = RealField(chart);
    b.q_geom = RealField(chart);
    b.tonly_qgeom = RealField(chart);
    b.r_hode = ComplexField(chart);

    // s-derivative by chain rule: f_s = (conj(h_z) f_zbar - h_z f_z)/(2i).
    auto tonly_residual = [&](const ComplexField& g) {
        ComplexField gz = derivative(g, Wirtinger::Dz);
        ComplexField gzb = derivative(g, Wirtinger::Dzbar);
        RealField out(chart);
        parallel_for(chart.size(), [&](std::size_t i) {
            out[i] = std::abs((std::conj(hz[i]) * gzb[i] - hz[i] * gz[i]) / (2.0 * kI));
        });
        return out;
    };

    ComplexField emu_phi(chart);
    parallel_for(chart.size(), [&](std::size_t i) {
        emu_phi[i] = std::exp(-data.u[i]) * data.phi[i];
    });
    b.tonly_mean_curv = tonly_residual(emu_phi);

    ComplexField e2u_over_hz(chart), psi_ratio(chart), qgeom_c(chart);
    parallel_for(chart.size(), [&](std::size_t i) {
        const double e2u = std::exp(2.0 * data.u[i]);
        const cplx hzv = hz[i];
        const double ahz = std::abs(hzv);
        e2u_over_hz[i] = (ahz > 0) ? e2u / hzv : cplx{};
        psi_ratio[i] = (ahz > 0) ? std::abs(data.psi[i]) / ahz : 0.0;
        b.q_geom[i] = (hsum[i] != 0.0) ? std::norm(hzv) / hsum[i] : 0.0;
        qgeom_c[i] = b.q_geom[i];
    });
    b.tonly_e2u_over_hz = tonly_residual(e2u_over_hz);
    b.tonly_psi_ratio = tonly_residual(psi_ratio);
    b.tonly_qgeom = tonly_residual(qgeom_c);

    parallel_for(chart.size(), [&](std::size_t i) {
        const cplx W = hzz[i] * hsum[i] - hz[i] * hz[i];
        b.r_hode[i] = W - std::conj(W);
    });

    // Both e^{2u} expressions of the Codazzi consequence, against the data.
    ComplexField psi_zbar = derivative(data.psi, Wirtinger::Dzbar);
    ComplexField cm = conformal_maslov_field(data);
    std::vector<std::uint8_t> m24(chart.size());
    double cm_max = 0.0;
    for (std::size_t i = 0; i < chart.size(); ++i) cm_max = std::max(cm_max, std::abs(cm[i]));
    for (std::size_t i = 0; i < chart.size(); ++i)
        m24[i] = m[i] && std::abs(cm[i]) > 1e-8 * cm_max;
    parallel_for(chart.size(), [&](std::size_t i) {
        if (!m24[i]) return;
        const double e2u = std::exp(2.0 * data.u[i]);
        b.r24_direct[i] = std::abs(psi_zbar[i] / cm[i] - e2u);
        b.r24_h[i] = std::abs(-std::conj(hz[i]) / (hsum[i] * hsum[i] * cm[i]) - e2u);
    });

    b.mask = erode_mask(chart, m, 2);
    b.mask_r24 = erode_mask(chart, m24, 2);
    b.n24_direct = field_norms_masked(b.r24_direct, b.mask_r24);
    b.n24_h = field_norms_masked(b.r24_h, b.mask_r24);
    b.n_tonly_mean_curv = field_norms_masked(b.tonly_mean_curv, b.mask);
    b.n_tonly_e2u = field_norms_masked(b.tonly_e2u_over_hz, b.mask);
    b.n_tonly_psi = field_norms_masked(b.tonly_psi_ratio, b.mask);
    b.n_tonly_qgeom = field_norms_masked(b.tonly_qgeom, b.mask);
    b.n_hode = field_norms_masked(b.r_hode, b.mask);

    const double phi_imag = field_norms(imag_part(data.phi), 0).linf;
    const double phi_scale = field_norms(abs_field(data.phi), 0).linf;
    b.tonly_applicable = phi_imag <= h2_tolerance(chart) * (1.0 + phi_scale);
    b.tonly_informational = data.c() != 0;
    return b;
}

namespace {

struct Cluster {
    std::vector<std::size_t> cells;
    int min_ix = 0, max_ix = 0, min_iy = 0, max_iy = 0;
};

std::vector<Cluster> cluster_flagged(const ConformalChart& chart,
                                     const std::vector<std::uint8_t>& flagged) {
    std::vector<int> label(chart.size(), -1);
    std::vector<Cluster> clusters;
    for (int iy = 0; iy < chart.ny; ++iy) {
        for (int ix = 0; ix < chart.nx; ++ix) {
            const std::size_t i = chart.idx(ix, iy);
            if (!flagged[i] || label[i] >= 0) continue;
            // BFS over flagged cells within Chebyshev distance 2.
            const int id = static_cast<int>(clusters.size());
            Cluster cl;
            cl.min_ix = cl.max_ix = ix;
            cl.min_iy = cl.max_iy = iy;
            std::deque<std::size_t> queue{i};
            label[i] = id;
            while (!queue.empty()) {
                const std::size_t cur = queue.front();
                queue.pop_front();
                cl.cells.push_back(cur);
                const int cx = static_cast<int>(cur) % chart.nx;
                const int cy = static_cast<int>(cur) / chart.nx;
                cl.min_ix = std::min(cl.min_ix, cx);
                cl.max_ix = std::max(cl.max_ix, cx);
                cl.min_iy = std::min(cl.min_iy, cy);
                cl.max_iy = std::max(cl.max_iy, cy);
                for (int dy = -2; dy <= 2; ++dy) {
                    for (int dx = -2; dx <= 2; ++dx) {
                        int jx = cx + dx, jy = cy + dy;
                        if (chart.periodic_x) jx = (jx + chart.nx) % chart.nx;
                        if (chart.periodic_y) jy = (jy + chart.ny) % chart.ny;
                        if (jx < 0 || jx >= chart.nx || jy < 0 || jy >= chart.ny) continue;
                        const std::size_t j = chart.idx(jx, jy);
                        if (flagged[j] && label[j] < 0) {
                            label[j] = id;
                            queue.push_back(j);
                        }
                    }
                }
            }
            clusters.push_back(std::move(cl));
        }
    }
    return clusters;
}

} // namespace

UmbilicReport umbilic_analysis(const ComplexField& field, double floor_rel) {
    const ConformalChart& chart = field.chart();
    double max_abs = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) max_abs = std::max(max_abs, std::abs(field[i]));
    if (max_abs == 0.0)
        throw InputError(InputError::Code::ZeroField, "umbilic_analysis: field vanishes identically");

    double med = median_abs(field);
    if (med <= 0.0) med = 1e-3 * max_abs;
    const double threshold = floor_rel * med;

    // A relative threshold alone misses simple zeros between nodes (|f|
    // grows linearly, so the nearest node sits at ~|grad f| h/2). Flag cells
    // by the argument principle on each elementary plaquette as well: a
    // nonzero phase winding around a cell certifies a zero inside it.
    std::vector<std::uint8_t> flagged(chart.size());
    for (std::size_t i = 0; i < chart.size(); ++i) flagged[i] = std::abs(field[i]) < threshold;
    for (int iy = 0; iy + 1 < chart.ny || (chart.periodic_y && iy < chart.ny); ++iy) {
        for (int ix = 0; ix + 1 < chart.nx || (chart.periodic_x && ix < chart.nx); ++ix) {
            const int jx = (ix + 1) % chart.nx;
            const int jy = (iy + 1) % chart.ny;
            const cplx corner[4] = {field.at(ix, iy), field.at(jx, iy), field.at(jx, jy),
                                    field.at(ix, jy)};
            bool tiny = false;
            double total = 0.0, max_step = 0.0;
            for (int k = 0; k < 4; ++k) {
                if (std::abs(corner[k]) < threshold) tiny = true;
                const double step = std::arg(corner[(k + 1) % 4] / corner[k]);
                max_step = std::max(max_step, std::abs(step));
                total += step;
            }
            const bool winds = !tiny && max_step < 3.0 && std::lround(total / (2.0 * M_PI)) != 0;
            if (winds) {
                flagged[chart.idx(ix, iy)] = 1;
                flagged[chart.idx(jx, iy)] = 1;
                flagged[chart.idx(jx, jy)] = 1;
                flagged[chart.idx(ix, jy)] = 1;
            }
        }
    }

    UmbilicReport rep;
    rep.genus1_applicable = chart.periodic_x && chart.periodic_y;

    for (const Cluster& cl : cluster_flagged(chart, flagged)) {
        // Best zero estimate: the cell of minimal |field|.
        std::size_t best = cl.cells.front();
        for (std::size_t cell : cl.cells)
            if (std::abs(field[cell]) < std::abs(field[best])) best = cell;

        bool indexed = false;
        for (int margin = 2; margin <= std::max(chart.nx, chart.ny); ++margin) {
            LoopRect loop{cl.min_ix - margin, cl.min_iy - margin, cl.max_ix + margin,
                          cl.max_iy + margin};
            if (loop.ix0 < 0 || loop.iy0 < 0 || loop.ix1 >= chart.nx || loop.iy1 >= chart.ny) break;
            const WindingResult wr = winding_index(field, loop, 2.0 * threshold);
            if (wr.status == WindingStatus::Ok) {
                UmbilicPoint p;
                p.ix = static_cast<int>(best) % chart.nx;
                p.iy = static_cast<int>(best) / chart.nx;
                p.index = wr.index;
                p.margin = wr.min_abs;
                rep.points.push_back(p);
                rep.degree += wr.index;
                indexed = true;
                break;
            }
            // ZeroOnLoop / PhaseStepTooLarge / NonInteger: widen and retry.
        }
        if (!indexed) ++rep.boundary_clusters;
    }
    rep.genus1_consistent =
        rep.genus1_applicable && rep.degree == 0 && rep.points.empty() && rep.boundary_clusters == 0;
    return rep;
}

namespace {

// Least-squares fit of complex samples by a polynomial of degree k in
// zeta = z - z_center; returns the coefficient vector (size k+1).
std::vector<cplx> fit_poly(const std::vector<cplx>& zeta, const std::vector<cplx>& val, int k) {
    const int n = k + 1;
    std::vector<cplx> G(n * n), rhs(n);
    std::vector<cplx> basis(zeta.size() * n);
    for (std::size_t s = 0; s < zeta.size(); ++s) {
        cplx p = 1.0;
        for (int j = 0; j < n; ++j) {
            basis[s * n + j] = p;
            p *= zeta[s];
        }
    }
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            cplx g = 0.0;
            for (std::size_t s = 0; s < zeta.size(); ++s)
                g += std::conj(basis[s * n + a]) * basis[s * n + b];
            G[a * n + b] = g;
        }
        cplx r = 0.0;
        for (std::size_t s = 0; s < zeta.size(); ++s)
            r += std::conj(basis[s * n + a]) * val[s];
        rhs[a] = r;
    }
    // Gaussian elimination with partial pivoting on the (k+1)x(k+1) system.
    std::vector<int> piv(n);
    std::iota(piv.begin(), piv.end(), 0);
    for (int col = 0; col < n; ++col) {
        int p = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(G[r * n + col]) > std::abs(G[p * n + col])) p = r;
        if (p != col) {
            for (int j = 0; j < n; ++j) std::swap(G[col * n + j], G[p * n + j]);
            std::swap(rhs[col], rhs[p]);
        }
        const cplx d = G[col * n + col];
        if (std::abs(d) == 0.0) return {};
        for (int r = col + 1; r < n; ++r) {
            const cplx f = G[r * n + col] / d;
            for (int j = col; j < n; ++j) G[r * n + j] -= f * G[col * n + j];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<cplx> coef(n);
    for (int r = n - 1; r >= 0; --r) {
        cplx acc = rhs[r];
        for (int j = r + 1; j < n; ++j) acc -= G[r * n + j] * coef[j];
        coef[r] = acc / G[r * n + r];
    }
    return coef;
}

} // namespace

PairDecomposition pair_decompose(const ComplexField& psi1, const ComplexField& psi2,
                                 double floor_rel) {
    require_same_chart(psi1.chart(), psi2.chart(), "pair_decompose");
    const ConformalChart& chart = psi1.chart();

    PairDecomposition d;
    d.h = ComplexField(chart);
    d.q = ComplexField(chart);
    d.alpha = RealField(chart);
    double diff_max = 0.0;
    for (std::size_t i = 0; i < chart.size(); ++i) {
        d.h[i] = psi1[i] - psi2[i];
        d.q[i] = psi1[i] + psi2[i];
        diff_max = std::max(diff_max, std::abs(d.h[i]));
    }
    if (diff_max == 0.0)
        throw InputError(InputError::Code::NotAPair, "pair_decompose: psi1 == psi2, not a pair");

    const double med = median_abs(d.h);
    const double floor_abs = floor_rel * (med > 0.0 ? med : diff_max);
    d.direct_mask.assign(chart.size(), 0);

    RealField mod_mismatch(chart);
    RealField alpha_imag(chart);
    parallel_for(chart.size(), [&](std::size_t i) {
        mod_mismatch[i] = std::abs(psi1[i]) - std::abs(psi2[i]);
        if (std::abs(d.h[i]) > floor_abs) {
            d.direct_mask[i] = 1;
            const cplx a = -kI * d.q[i] / d.h[i];
            d.alpha[i] = a.real();
            alpha_imag[i] = a.imag();
        }
    });
    d.h_cr_linf = cr_residual(d.h).norms.linf;
    d.modulus_mismatch_linf = field_norms(mod_mismatch).linf;
    d.alpha_imag_linf = field_norms_masked(alpha_imag, d.direct_mask).linf;

    // Fill alpha over zeros of h by the local factorization: fit h and q by
    // degree-k polynomials on a 5x5 patch (k = umbilic index) and divide the
    // leading coefficients.
    bool any_masked = false;
    for (std::size_t i = 0; i < chart.size(); ++i)
        if (!d.direct_mask[i]) any_masked = true;
    if (any_masked) {
        d.umbilics = umbilic_analysis(d.h, floor_rel);
        for (std::size_t i = 0; i < chart.size(); ++i) {
            if (d.direct_mask[i]) continue;
            const int ix = static_cast<int>(i) % chart.nx;
            const int iy = static_cast<int>(i) / chart.nx;
            // Nearest indexed umbilic determines the fit degree.
            int k = 0;
            double best = std::numeric_limits<double>::infinity();
            for (const UmbilicPoint& p : d.umbilics.points) {
                const double dist = std::hypot(double(p.ix - ix), double(p.iy - iy));
                if (dist < best) {
                    best = dist;
                    k = p.index;
                }
            }
            bool filled = false;
            if (k >= 1) {
                std::vector<cplx> zeta, hv, qv;
                const cplx zc = chart.z(ix, iy);
                for (int dy = -2; dy <= 2; ++dy) {
                    for (int dx = -2; dx <= 2; ++dx) {
                        int jx = ix + dx, jy = iy + dy;
                        if (chart.periodic_x) jx = (jx + chart.nx) % chart.nx;
                        if (chart.periodic_y) jy = (jy + chart.ny) % chart.ny;
                        if (jx < 0 || jx >= chart.nx || jy < 0 || jy >= chart.ny) continue;
                        zeta.push_back(chart.z(jx, jy) - zc);
                        hv.push_back(d.h.at(jx, jy));
                        qv.push_back(d.q.at(jx, jy));
                    }
                }
                const auto ch = fit_poly(zeta, hv, k);
                const auto cq = fit_poly(zeta, qv, k);
                if (!ch.empty() && !cq.empty() && std::abs(ch[k]) > 0.0) {
                    d.alpha[i] = (-kI * cq[k] / ch[k]).real();
                    filled = true;
                }
            }
            if (!filled) {
                // Nearest direct-mask cell, spiral search.
                for (int radius = 1; radius < std::max(chart.nx, chart.ny) && !filled; ++radius) {
                    for (int dy = -radius; dy <= radius && !filled; ++dy) {
                        for (int dx = -radius; dx <= radius && !filled; ++dx) {
                            if (std::max(std::abs(dx), std::abs(dy)) != radius) continue;
                            const int jx = ix + dx, jy = iy + dy;
                            if (jx < 0 || jx >= chart.nx || jy < 0 || jy >= chart.ny) continue;
                            if (d.direct_mask[chart.idx(jx, jy)]) {
                                d.alpha[i] = d.alpha[chart.idx(jx, jy)];
                                filled = true;
                            }
                        }
                    }
                }
                d.fallback_cells.push_back(GridPoint{ix, iy});
            }
        }
    }
    return d;
}

std::pair<ComplexField, ComplexField> pair_compose(const ComplexField& h, const RealField& alpha) {
    require_same_chart(h.chart(), alpha.chart(), "pair_compose");
    ComplexField psi1(h.chart()), psi2(h.chart());
    parallel_for(h.size(), [&](std::size_t i) {
        const cplx ia(0.0, alpha[i]);
        psi1[i] = 0.5 * h[i] * (ia + 1.0);
        psi2[i] = 0.5 * h[i] * (ia - 1.0);
    });
    return {std::move(psi1), std::move(psi2)};
}

LtDiagnostics lt_diagnostics(const ComplexField& psi1, const ComplexField& psi2,
                             const RealField& u, double tol, double floor_rel) {
    require_same_chart(psi1.chart(), psi2.chart(), "lt_diagnostics");
    require_same_chart(psi1.chart(), u.chart(), "lt_diagnostics");
    const ConformalChart& chart = psi1.chart();

    const double med = median_abs(psi1);
    if (med <= 0.0)
        throw InputError(InputError::Code::ZeroField, "lt_diagnostics: psi1 vanishes on most of the chart");
    const double floor_abs = floor_rel * med;

    LtDiagnostics lt;
    lt.mask.assign(chart.size(), 0);
    double mismatch = 0.0;
    for (std::size_t i = 0; i < chart.size(); ++i) {
        const double a1 = std::abs(psi1[i]);
        if (a1 > floor_abs && std::abs(psi2[i]) > floor_abs) {
            lt.mask[i] = 1;
            mismatch = std::max(mismatch, std::abs(a1 - std::abs(psi2[i])));
        }
    }
    if (mismatch > tol * (1.0 + med))
        throw InputError(InputError::Code::NotAPair,
                         "lt_diagnostics: |psi1| and |psi2| differ by " + std::to_string(mismatch));

    // Principal phases, then a continuous branch by breadth-first unwrapping
    // from the masked cell of maximal |psi1|.
    std::vector<double> principal(chart.size(), 0.0);
    for (std::size_t i = 0; i < chart.size(); ++i)
        if (lt.mask[i]) principal[i] = std::arg(psi2[i] / psi1[i]);

    std::size_t seed = 0;
    double seed_abs = -1.0;
    for (std::size_t i = 0; i < chart.size(); ++i) {
        if (lt.mask[i] && std::abs(psi1[i]) > seed_abs) {
            seed_abs = std::abs(psi1[i]);
            seed = i;
        }
    }
    if (seed_abs < 0.0)
        throw InputError(InputError::Code::ZeroField, "lt_diagnostics: empty mask");

    lt.theta = RealField(chart);
    std::vector<std::uint8_t> visited(chart.size(), 0);
    std::deque<std::size_t> queue{seed};
    visited[seed] = 1;
    lt.theta[seed] = principal[seed];
    const int dx4[4] = {1, -1, 0, 0};
    const int dy4[4] = {0, 0, 1, -1};
    while (!queue.empty()) {
        const std::size_t cur = queue.front();
        queue.pop_front();
        const int cx = static_cast<int>(cur) % chart.nx;
        const int cy = static_cast<int>(cur) / chart.nx;
        for (int k = 0; k < 4; ++k) {
            int jx = cx + dx4[k], jy = cy + dy4[k];
            if (chart.periodic_x) jx = (jx + chart.nx) % chart.nx;
            if (chart.periodic_y) jy = (jy + chart.ny) % chart.ny;
            if (jx < 0 || jx >= chart.nx || jy < 0 || jy >= chart.ny) continue;
            const std::size_t j = chart.idx(jx, jy);
            if (!lt.mask[j] || visited[j]) continue;
            visited[j] = 1;
            lt.theta[j] = lt.theta[cur] + wrap_to_pi(principal[j] - principal[cur]);
            queue.push_back(j);
        }
    }

    // Shift the whole branch so the seed lands in (0, 2pi).
    double shift = 0.0;
    while (lt.theta[seed] + shift <= 0.0) shift += 2.0 * M_PI;
    while (lt.theta[seed] + shift > 2.0 * M_PI) shift -= 2.0 * M_PI;
    for (std::size_t i = 0; i < chart.size(); ++i)
        if (lt.mask[i]) lt.theta[i] += shift;

    // Holonomy detection: every masked edge must agree with the branch.
    lt.branch_ok = true;
    for (int iy = 0; iy < chart.ny; ++iy) {
        for (int ix = 0; ix < chart.nx; ++ix) {
            const std::size_t i = chart.idx(ix, iy);
            if (!lt.mask[i]) continue;
            for (int k = 0; k < 2; ++k) { // +x and +y edges once each
                int jx = ix + (k == 0 ? 1 : 0), jy = iy + (k == 1 ? 1 : 0);
                if (chart.periodic_x) jx = jx % chart.nx;
                if (chart.periodic_y) jy = jy % chart.ny;
                if (jx >= chart.nx || jy >= chart.ny) continue;
                const std::size_t j = chart.idx(jx, jy);
                if (!lt.mask[j]) continue;
                const double e =
                    std::abs(lt.theta[j] - lt.theta[i] - wrap_to_pi(principal[j] - principal[i]));
                if (e > lt.holonomy_defect) {
                    lt.holonomy_defect = e;
                    lt.holonomy_location = GridPoint{ix, iy};
                }
            }
        }
    }
    if (lt.holonomy_defect > M_PI) lt.branch_ok = false;

    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < chart.size(); ++i) {
        if (!lt.mask[i]) continue;
        lo = std::min(lo, lt.theta[i]);
        hi = std::max(hi, lt.theta[i] - 2.0 * M_PI);
    }
    lt.range_violation = std::max(-lo, hi);

    lt.Q = ComplexField(chart);
    RealField log_absQ(chart), arg_Q(chart);
    parallel_for(chart.size(), [&](std::size_t i) {
        if (!lt.mask[i]) return;
        const double th = lt.theta[i];
        lt.Q[i] = cplx(1.0 - std::cos(th), -std::sin(th));
        log_absQ[i] = std::log(std::max(2.0 * std::abs(std::sin(0.5 * th)), 1e-300));
        arg_Q[i] = 0.5 * (th - M_PI);
    });
    lt.lap_log_absQ = metric_laplacian(log_absQ, u);
    lt.lap_argQ = metric_laplacian(arg_Q, u);

    const auto norm_mask = erode_mask(chart, lt.mask, 2);
    lt.lap_arg_norms = field_norms_masked(lt.lap_argQ, norm_mask);
    lt.lap_logabs_norms = field_norms_masked(lt.lap_log_absQ, norm_mask);
    lt.arg_harmonic = lt.lap_arg_norms.linf <= tol;
    double smax = -std::numeric_limits<double>::infinity();
    int positive = 0;
    for (std::size_t i = 0; i < chart.size(); ++i) {
        if (!norm_mask[i]) continue;
        smax = std::max(smax, lt.lap_log_absQ[i]);
        if (lt.lap_log_absQ[i] > tol) ++positive;
    }
    lt.logabs_positive_cells = positive;
    lt.logabs_max = (positive >= 0 && smax != -std::numeric_limits<double>::infinity()) ? smax : 0.0;
    return lt;
}

} // namespace lagsurf
