#include "lagsurf/reconstruction.hpp"

#include <algorithm>
#include <cmath>

#include "lagsurf/exec.hpp"
#include "lagsurf/integrability.hpp"

namespace lagsurf {

namespace {

const cplx kI(0.0, 1.0);

// Scalar ingredients of the coefficient matrices at (possibly interpolated)
// points along a leg.
struct Ingredients {
    double u = 0.0;
    cplx u_z, phi, psi;
};

struct CoeffFields {
    const SurfaceData* data;
    ComplexField u_z;

    // The coefficient field u_z feeds a 4th-order integrator; differencing it
    // at 2nd order would cap the conservation drift at O(h^2) on smooth data.
    explicit CoeffFields(const SurfaceData& d)
        : data(&d), u_z(d.chart.nx >= 5 && d.chart.ny >= 5
                            ? derivative4(d.u, Wirtinger::Dz)
                            : derivative(d.u, Wirtinger::Dz)) {}

    Ingredients at(int ix, int iy) const {
        return Ingredients{data->u.at(ix, iy), u_z.at(ix, iy), data->phi.at(ix, iy),
                           data->psi.at(ix, iy)};
    }
};

Ingredients lerp(const Ingredients& a, const Ingredients& b) {
    Ingredients r;
    r.u = 0.5 * (a.u + b.u);
    r.u_z = 0.5 * (a.u_z + b.u_z);
    r.phi = 0.5 * (a.phi + b.phi);
    r.psi = 0.5 * (a.psi + b.psi);
    return r;
}

// Midpoint of [n1, n2] from four line samples (n0, n1, n2, n3), 4th order.
Ingredients cubic_mid(const Ingredients& n0, const Ingredients& n1, const Ingredients& n2,
                      const Ingredients& n3) {
    auto mix = [](auto a, auto b, auto c, auto d) { return (-a + 9.0 * b + 9.0 * c - d) / 16.0; };
    Ingredients r;
    r.u = mix(n0.u, n1.u, n2.u, n3.u);
    r.u_z = mix(n0.u_z, n1.u_z, n2.u_z, n3.u_z);
    r.phi = mix(n0.phi, n1.phi, n2.phi, n3.phi);
    r.psi = mix(n0.psi, n1.psi, n2.psi, n3.psi);
    return r;
}

// One-sided midpoint of [n0, n1] from samples (n0, n1, n2, n3) ahead.
Ingredients cubic_mid_onesided(const Ingredients& n0, const Ingredients& n1, const Ingredients& n2,
                               const Ingredients& n3) {
    auto mix = [](auto a, auto b, auto c, auto d) {
        return 0.3125 * a + 0.9375 * b - 0.3125 * c + 0.0625 * d;
    };
    Ingredients r;
    r.u = mix(n0.u, n1.u, n2.u, n3.u);
    r.u_z = mix(n0.u_z, n1.u_z, n2.u_z, n3.u_z);
    r.phi = mix(n0.phi, n1.phi, n2.phi, n3.phi);
    r.psi = mix(n0.psi, n1.psi, n2.psi, n3.psi);
    return r;
}

Mat4c build_U_c2(const Ingredients& g) {
    const cplx emu_psi = std::exp(-g.u) * g.psi;
    const cplx phib = std::conj(g.phi);
    Mat4c U;
    U(0, 0) = g.u_z;   U(0, 2) = -g.phi;   U(0, 3) = -phib;
    U(1, 2) = -emu_psi; U(1, 3) = -g.phi;
    U(2, 0) = g.phi;   U(2, 1) = phib;     U(2, 2) = g.u_z;
    U(3, 0) = emu_psi; U(3, 1) = g.phi;
    return U;
}

Mat4c build_V_c2(const Ingredients& g) {
    const cplx u_zb = std::conj(g.u_z);
    const cplx emu_psib = std::exp(-g.u) * std::conj(g.psi);
    const cplx phib = std::conj(g.phi);
    Mat4c V;
    V(0, 2) = -phib;   V(0, 3) = -emu_psib;
    V(1, 1) = u_zb;    V(1, 2) = -g.phi;    V(1, 3) = -phib;
    V(2, 0) = phib;    V(2, 1) = emu_psib;
    V(3, 0) = g.phi;   V(3, 1) = phib;      V(3, 3) = u_zb;
    return V;
}

Mat3c build_U_lift(const Ingredients& g, double f_term_sign) {
    const cplx emu_psi = std::exp(-g.u) * g.psi;
    Mat3c U;
    U(0, 2) = f_term_sign * std::exp(g.u);
    U(1, 0) = 1.0;
    U(1, 1) = g.u_z + kI * g.phi;
    U(1, 2) = kI * std::conj(g.phi);
    U(2, 1) = kI * emu_psi;
    U(2, 2) = kI * g.phi;
    return U;
}

Mat3c build_V_lift(const Ingredients& g, double f_term_sign) {
    const cplx emu_psib = std::exp(-g.u) * std::conj(g.psi);
    Mat3c V;
    V(0, 1) = f_term_sign * std::exp(g.u);
    V(1, 1) = kI * std::conj(g.phi);
    V(1, 2) = kI * emu_psib;
    V(2, 0) = 1.0;
    V(2, 1) = kI * g.phi;
    V(2, 2) = std::conj(g.u_z) + kI * std::conj(g.phi);
    return V;
}

// Direction of one grid step: unit vector (sx, sy) with sx, sy in {-1,0,1}.
struct StepDir {
    int sx = 0, sy = 0;
};

// Directional coefficient: d(state)/dt = state * B with
// B = (sx + i sy) U + (sx - i sy) V (chain rule along z(t)).
template <class Mat>
Mat directional(const Mat& U, const Mat& V, StepDir d) {
    const cplx zdot(d.sx, d.sy);
    return U * zdot + V * std::conj(zdot);
}

// RK4 step for S' = S * B(t), constant step h, stages at B0, Bmid, B1.
template <class Mat>
Mat rk4_step(const Mat& S, const Mat& B0, const Mat& Bmid, const Mat& B1, double h) {
    const Mat k1 = S * B0;
    const Mat k2 = (S + k1 * (0.5 * h)) * Bmid;
    const Mat k3 = (S + k2 * (0.5 * h)) * Bmid;
    const Mat k4 = (S + k3 * h) * B1;
    return S + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
}

std::vector<GridPoint> expand_path(const ConformalChart& chart,
                                   const std::vector<GridPoint>& waypoints) {
    if (waypoints.empty())
        throw InputError(InputError::Code::PathOffChart, "empty integration path");
    std::vector<GridPoint> nodes;
    nodes.push_back(waypoints.front());
    for (std::size_t w = 0; w + 1 < waypoints.size(); ++w) {
        const GridPoint a = waypoints[w];
        const GridPoint b = waypoints[w + 1];
        if (a.ix != b.ix && a.iy != b.iy)
            throw InputError(InputError::Code::PathOffChart, "path legs must be axis-aligned");
        const int sx = (b.ix > a.ix) - (b.ix < a.ix);
        const int sy = (b.iy > a.iy) - (b.iy < a.iy);
        GridPoint p = a;
        while (!(p == b)) {
            p.ix += sx;
            p.iy += sy;
            nodes.push_back(p);
        }
    }
    for (const GridPoint& p : nodes) {
        if (p.ix < 0 || p.ix >= chart.nx || p.iy < 0 || p.iy >= chart.ny)
            throw InputError(InputError::Code::PathOffChart, "path leaves the chart");
    }
    return nodes;
}

// Sample the four line nodes needed for a cubic midpoint of the step a -> b,
// clamping to one-sided at open chart edges.
Ingredients midpoint_ingredients(const CoeffFields& cf, const ConformalChart& chart, GridPoint a,
                                 GridPoint b, StepDir d, CoeffInterp interp) {
    const Ingredients ga = cf.at(a.ix, a.iy);
    const Ingredients gb = cf.at(b.ix, b.iy);
    if (interp == CoeffInterp::Linear) return lerp(ga, gb);

    auto wrap = [&](int ix, int iy, bool& ok) -> GridPoint {
        if (chart.periodic_x) ix = (ix % chart.nx + chart.nx) % chart.nx;
        if (chart.periodic_y) iy = (iy % chart.ny + chart.ny) % chart.ny;
        ok = ix >= 0 && ix < chart.nx && iy >= 0 && iy < chart.ny;
        return GridPoint{ix, iy};
    };
    bool ok_before = false, ok_after = false, ok_after2 = false;
    const GridPoint before = wrap(a.ix - d.sx, a.iy - d.sy, ok_before);
    const GridPoint after = wrap(b.ix + d.sx, b.iy + d.sy, ok_after);
    const GridPoint after2 = wrap(b.ix + 2 * d.sx, b.iy + 2 * d.sy, ok_after2);

    if (ok_before && ok_after)
        return cubic_mid(cf.at(before.ix, before.iy), ga, gb, cf.at(after.ix, after.iy));
    if (ok_after && ok_after2)
        return cubic_mid_onesided(ga, gb, cf.at(after.ix, after.iy), cf.at(after2.ix, after2.iy));
    if (ok_before) {
        bool ok_before2 = false;
        const GridPoint before2 = wrap(a.ix - 2 * d.sx, a.iy - 2 * d.sy, ok_before2);
        if (ok_before2)
            return cubic_mid_onesided(gb, ga, cf.at(before.ix, before.iy),
                                      cf.at(before2.ix, before2.iy));
    }
    return lerp(ga, gb);
}

} // namespace

CoeffC2 coefficient_matrices_c2(const SurfaceData& data, GridPoint p) {
    if (data.c() != 0) throw InputError("coefficient_matrices_c2 requires c = 0");
    CoeffFields cf(data);
    const Ingredients g = cf.at(p.ix, p.iy);
    return CoeffC2{build_U_c2(g), build_V_c2(g)};
}

namespace detail {
CoeffLift coefficient_matrices_lift_signed(const SurfaceData& data, GridPoint p,
                                           double f_term_sign) {
    if (data.c() == 0) throw InputError("lift coefficient matrices require c = +-1");
    CoeffFields cf(data);
    const Ingredients g = cf.at(p.ix, p.iy);
    return CoeffLift{build_U_lift(g, f_term_sign),
                     build_V_lift(g, f_term_sign)};
}
} // namespace detail

CoeffLift coefficient_matrices_lift(const SurfaceData& data, GridPoint p) {
    return detail::coefficient_matrices_lift_signed(data, p, -static_cast<double>(data.c()));
}

Vec4c apply_J(const Vec4c& v) {
    Vec4c r;
    r[0] = -v[1];
    r[1] = v[0];
    r[2] = -v[3];
    r[3] = v[2];
    return r;
}

cplx bilinear_r4(const Vec4c& a, const Vec4c& b) {
    cplx s = 0.0;
    for (int i = 0; i < 4; ++i) s += a[i] * b[i];
    return s;
}

cplx herm_product(const Vec3c& a, const Vec3c& b, int c) {
    const double eps0 = (c == -1) ? -1.0 : 1.0;
    return eps0 * a[0] * std::conj(b[0]) + a[1] * std::conj(b[1]) + a[2] * std::conj(b[2]);
}

double DriftReport::max() const {
    return std::max({conformal_null, conformal_pair, lagrangian, jlink, reality, quadric,
                     horizontality});
}

void DriftReport::merge(const DriftReport& o) {
    conformal_null = std::max(conformal_null, o.conformal_null);
    conformal_pair = std::max(conformal_pair, o.conformal_pair);
    lagrangian = std::max(lagrangian, o.lagrangian);
    jlink = std::max(jlink, o.jlink);
    reality = std::max(reality, o.reality);
    quadric = std::max(quadric, o.quadric);
    horizontality = std::max(horizontality, o.horizontality);
}

DriftReport frame_invariant_drift(const SurfaceData& data, GridPoint p, const Frame& frame) {
    DriftReport d;
    const double eu = std::exp(data.u.at(p.ix, p.iy));
    if (const FrameC2* fr = std::get_if<FrameC2>(&frame)) {
        const Vec4c c1 = fr->sigma.col(0);
        const Vec4c c2 = fr->sigma.col(1);
        d.conformal_null = std::abs(bilinear_r4(c1, c1));
        d.conformal_pair = std::abs(bilinear_r4(c1, c2) - eu);
        d.lagrangian = std::abs(bilinear_r4(c1, apply_J(c2)));
        Vec4c j1 = apply_J(c1), j2 = apply_J(c2);
        d.jlink = std::max((fr->sigma.col(2) - j1).max_abs(), (fr->sigma.col(3) - j2).max_abs());
        Vec4c conj1;
        for (int i = 0; i < 4; ++i) conj1[i] = std::conj(c1[i]);
        d.reality = (c2 - conj1).max_abs();
        for (int i = 0; i < 4; ++i) d.reality = std::max(d.reality, std::abs(fr->f[i].imag()));
    } else {
        const FrameLift& fl = std::get<FrameLift>(frame);
        const int c = data.c();
        const Vec3c F = fl.cols.col(0);
        const Vec3c Fz = fl.cols.col(1);
        const Vec3c Fzb = fl.cols.col(2);
        const double target = (c == -1) ? -1.0 : 1.0;
        d.quadric = std::abs(herm_product(F, F, c) - target);
        d.horizontality = std::max(std::abs(herm_product(Fz, F, c).imag()),
                                   std::abs(herm_product(Fzb, F, c).imag()));
        const cplx hzz = herm_product(Fz, Fz, c);
        const cplx hbb = herm_product(Fzb, Fzb, c);
        d.conformal_pair = std::abs(0.5 * (hzz + hbb) - eu);
        d.conformal_null = std::abs(herm_product(Fz, Fzb, c));
        d.lagrangian = std::abs(0.5 * (hbb - hzz));
    }
    return d;
}

Frame initial_frame(const SurfaceData& data, GridPoint base) {
    if (base.ix < 0 || base.ix >= data.chart.nx || base.iy < 0 || base.iy >= data.chart.ny)
        throw InputError(InputError::Code::PathOffChart, "base point outside chart");
    const double scale = std::sqrt(2.0 * std::exp(data.u.at(base.ix, base.iy)));
    if (data.c() == 0) {
        Vec4c fx, fy;
        fx[0] = scale;
        fy[2] = scale;
        Vec4c fz, fzb;
        for (int i = 0; i < 4; ++i) {
            fz[i] = 0.5 * (fx[i] - kI * fy[i]);
            fzb[i] = 0.5 * (fx[i] + kI * fy[i]);
        }
        FrameC2 fr;
        fr.sigma.set_col(0, fz);
        fr.sigma.set_col(1, fzb);
        fr.sigma.set_col(2, apply_J(fz));
        fr.sigma.set_col(3, apply_J(fzb));
        return fr;
    }
    Vec3c F, Fx, Fy;
    F[0] = 1.0;
    Fx[1] = scale;
    Fy[2] = scale;
    Vec3c Fz, Fzb;
    for (int i = 0; i < 3; ++i) {
        Fz[i] = 0.5 * (Fx[i] - kI * Fy[i]);
        Fzb[i] = 0.5 * (Fx[i] + kI * Fy[i]);
    }
    FrameLift fl;
    fl.cols.set_col(0, F);
    fl.cols.set_col(1, Fz);
    fl.cols.set_col(2, Fzb);
    return fl;
}

namespace {

// Augmented 5x5 state for c = 0: [[sigma, f], [0, 1]]; the position column
// integrates with the same RK4 scheme as the frame.
Mat5c augment(const FrameC2& fr) {
    Mat5c S;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) S(i, j) = fr.sigma(i, j);
        S(i, 4) = fr.f[i];
    }
    S(4, 4) = 1.0;
    return S;
}

FrameC2 unaugment(const Mat5c& S) {
    FrameC2 fr;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) fr.sigma(i, j) = S(i, j);
        fr.f[i] = S(i, 4);
    }
    return fr;
}

Mat5c coeff_c2_augmented(const Ingredients& g, StepDir d) {
    const Mat4c B = directional(build_U_c2(g), build_V_c2(g), d);
    Mat5c A;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) A(i, j) = B(i, j);
    // df/dt = (sx + i sy) f_z + (sx - i sy) f_zbar
    const cplx zdot(d.sx, d.sy);
    A(0, 4) = zdot;
    A(1, 4) = std::conj(zdot);
    return A;
}

void project_quadric(Mat3c& cols, int c) {
    Vec3c F = cols.col(0);
    const double q = herm_product(F, F, c).real();
    const double target = (c == -1) ? -1.0 : 1.0;
    if (q * target <= 0.0) return;
    const double scale = 1.0 / std::sqrt(q * target);
    cols.set_col(0, F * scale);
}

struct PathRunner {
    const SurfaceData& data;
    const CoeffFields& cf;
    IntegrateOptions opts;

    PathResult run(const std::vector<GridPoint>& nodes, const Frame& frame0) const {
        PathResult res;
        res.frames.reserve(nodes.size());
        res.frames.push_back(frame0);
        res.drift = frame_invariant_drift(data, nodes.front(), frame0);

        const ConformalChart& chart = data.chart;
        const int c = data.c();
        if (c == 0) {
            Mat5c S = augment(std::get<FrameC2>(frame0));
            for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
                const GridPoint a = nodes[k], b = nodes[k + 1];
                const StepDir d{b.ix - a.ix, b.iy - a.iy};
                const double h = (d.sx != 0) ? chart.hx() : chart.hy();
                const Mat5c B0 = coeff_c2_augmented(cf.at(a.ix, a.iy), d);
                const Mat5c Bm = coeff_c2_augmented(
                    midpoint_ingredients(cf, chart, a, b, d, opts.interp), d);
                const Mat5c B1 = coeff_c2_augmented(cf.at(b.ix, b.iy), d);
                S = rk4_step(S, B0, Bm, B1, h);
                FrameC2 fr = unaugment(S);
                res.drift.merge(frame_invariant_drift(data, b, fr));
                res.frames.push_back(std::move(fr));
            }
        } else {
            const double sign = -static_cast<double>(c);
            Mat3c S = std::get<FrameLift>(frame0).cols;
            for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
                const GridPoint a = nodes[k], b = nodes[k + 1];
                const StepDir d{b.ix - a.ix, b.iy - a.iy};
                const double h = (d.sx != 0) ? chart.hx() : chart.hy();
                auto coeff = [&](const Ingredients& g) {
                    return directional(build_U_lift(g, sign), build_V_lift(g, sign), d);
                };
                const Mat3c B0 = coeff(cf.at(a.ix, a.iy));
                const Mat3c Bm = coeff(midpoint_ingredients(cf, chart, a, b, d, opts.interp));
                const Mat3c B1 = coeff(cf.at(b.ix, b.iy));
                S = rk4_step(S, B0, Bm, B1, h);
                if (opts.project_quadric) project_quadric(S, c);
                FrameLift fl{S};
                res.drift.merge(frame_invariant_drift(data, b, Frame(fl)));
                res.frames.push_back(Frame(std::move(fl)));
            }
        }
        return res;
    }
};

} // namespace

PathResult integrate_frame_path(const SurfaceData& data, const std::vector<GridPoint>& waypoints,
                                const Frame& frame0, const IntegrateOptions& opts) {
    const std::vector<GridPoint> nodes = expand_path(data.chart, waypoints);
    CoeffFields cf(data);
    return PathRunner{data, cf, opts}.run(nodes, frame0);
}

namespace {

std::vector<GridPoint> straight(GridPoint a, GridPoint b) { return {a, b}; }

double frame_difference(const Frame& a, const Frame& b) {
    if (const FrameC2* fa = std::get_if<FrameC2>(&a)) {
        const FrameC2& fb = std::get<FrameC2>(b);
        double m = (fa->f - fb.f).max_abs();
        for (int i = 0; i < 16; ++i) m = std::max(m, std::abs(fa->sigma.m[i] - fb.sigma.m[i]));
        return m;
    }
    const FrameLift& fa = std::get<FrameLift>(a);
    const FrameLift& fb = std::get<FrameLift>(b);
    double m = 0.0;
    for (int i = 0; i < 9; ++i) m = std::max(m, std::abs(fa.cols.m[i] - fb.cols.m[i]));
    return m;
}

} // namespace

ReconstructionResult reconstruct_grid(const SurfaceData& data, GridPoint base,
                                      const ReconstructOptions& opts) {
    const ConformalChart& chart = data.chart;
    if (base.ix < 0 || base.ix >= chart.nx || base.iy < 0 || base.iy >= chart.ny)
        throw InputError(InputError::Code::PathOffChart, "base point outside chart");

    ReconstructionResult res;
    res.integrability_linf = integrability_residuals(data).max_linf();
    if (!opts.override_integrability && res.integrability_linf > opts.tol)
        throw VerdictError("reconstruction rejected: integrability residual " +
                           std::to_string(res.integrability_linf) + " exceeds tolerance");

    CoeffFields cf(data);
    const PathRunner runner{data, cf, opts.integrate};
    const Frame frame0 = initial_frame(data, base);

    res.frames.assign(chart.size(), frame0);
    std::vector<DriftReport> column_drift(chart.nx);

    // Base row: integrate right and left from the base node.
    {
        std::vector<GridPoint> right_nodes, left_nodes;
        if (base.ix < chart.nx - 1) {
            auto pr = runner.run(expand_path(chart, straight(base, {chart.nx - 1, base.iy})), frame0);
            for (int ix = base.ix; ix < chart.nx; ++ix)
                res.frames[chart.idx(ix, base.iy)] = pr.frames[ix - base.ix];
            res.drift.merge(pr.drift);
        }
        if (base.ix > 0) {
            auto pl = runner.run(expand_path(chart, straight(base, {0, base.iy})), frame0);
            for (int ix = base.ix; ix >= 0; --ix)
                res.frames[chart.idx(ix, base.iy)] = pl.frames[base.ix - ix];
            res.drift.merge(pl.drift);
        }
    }

    // Columns integrate independently from the finished base row.
    parallel_for(static_cast<std::size_t>(chart.nx), [&](std::size_t col) {
        const int ix = static_cast<int>(col);
        const Frame& start = res.frames[chart.idx(ix, base.iy)];
        DriftReport drift;
        if (base.iy < chart.ny - 1) {
            auto pu = runner.run(expand_path(chart, straight({ix, base.iy}, {ix, chart.ny - 1})), start);
            for (int iy = base.iy; iy < chart.ny; ++iy)
                res.frames[chart.idx(ix, iy)] = pu.frames[iy - base.iy];
            drift.merge(pu.drift);
        }
        if (base.iy > 0) {
            auto pd = runner.run(expand_path(chart, straight({ix, base.iy}, {ix, 0})), start);
            for (int iy = base.iy; iy >= 0; --iy)
                res.frames[chart.idx(ix, iy)] = pd.frames[base.iy - iy];
            drift.merge(pd.drift);
        }
        column_drift[ix] = drift;
    });
    for (const DriftReport& d : column_drift) res.drift.merge(d);

    // Cross-consistency: re-reach a probe lattice column-first.
    const int np = std::max(1, opts.probes);
    double cross = 0.0;
    std::vector<GridPoint> probes;
    for (int a = 1; a <= np; ++a)
        for (int b = 1; b <= np; ++b) {
            GridPoint p{a * chart.nx / (np + 1), b * chart.ny / (np + 1)};
            if (p.ix == base.ix && p.iy == base.iy) continue;
            probes.push_back(p);
        }
    std::vector<double> probe_defect(probes.size(), 0.0);
    parallel_for(probes.size(), [&](std::size_t k) {
        const GridPoint p = probes[k];
        std::vector<GridPoint> way{base};
        if (p.iy != base.iy) way.push_back({base.ix, p.iy});
        if (p.ix != base.ix) way.push_back(p);
        auto pr = runner.run(expand_path(chart, way), frame0);
        probe_defect[k] = frame_difference(pr.frames.back(), res.frames[chart.idx(p.ix, p.iy)]);
    });
    for (double d : probe_defect) cross = std::max(cross, d);
    res.cross_defect = cross;

    // Assemble the immersion samples.
    Immersion& imm = res.immersion;
    imm.chart = chart;
    imm.c = data.c();
    if (imm.c == 0) {
        imm.points.resize(chart.size());
        parallel_for(chart.size(), [&](std::size_t i) {
            const FrameC2& fr = std::get<FrameC2>(res.frames[i]);
            for (int k = 0; k < 4; ++k) imm.points[i][k] = fr.f[k].real();
        });
    } else {
        imm.lift.resize(chart.size());
        imm.projective.resize(chart.size());
        std::vector<double> qv(chart.size(), 0.0);
        parallel_for(chart.size(), [&](std::size_t i) {
            const FrameLift& fl = std::get<FrameLift>(res.frames[i]);
            imm.lift[i] = fl.cols.col(0);
            imm.projective[i] = hopf_project(imm.lift[i], imm.c);
            const double target = (imm.c == -1) ? -1.0 : 1.0;
            qv[i] = std::abs(herm_product(imm.lift[i], imm.lift[i], imm.c) - target);
        });
        imm.max_quadric_violation = det_max_abs(qv);
    }
    return res;
}

double monodromy_defect(const SurfaceData& data, const LoopRect& loop,
                        const IntegrateOptions& opts) {
    const ConformalChart& chart = data.chart;
    if (loop.ix0 < 0 || loop.iy0 < 0 || loop.ix1 >= chart.nx || loop.iy1 >= chart.ny ||
        loop.ix0 >= loop.ix1 || loop.iy0 >= loop.iy1)
        throw InputError(InputError::Code::PathOffChart, "monodromy loop outside chart");

    const GridPoint corner{loop.ix0, loop.iy0};
    const Frame frame0 = initial_frame(data, corner);
    const std::vector<GridPoint> way{corner,
                                     {loop.ix1, loop.iy0},
                                     {loop.ix1, loop.iy1},
                                     {loop.ix0, loop.iy1},
                                     corner};
    const PathResult pr = integrate_frame_path(data, way, frame0, opts);
    if (data.c() == 0) {
        const Mat4c diff = std::get<FrameC2>(pr.frames.back()).sigma -
                           std::get<FrameC2>(frame0).sigma;
        return operator_norm(diff);
    }
    const Mat3c diff = std::get<FrameLift>(pr.frames.back()).cols -
                       std::get<FrameLift>(frame0).cols;
    return operator_norm(diff);
}

Vec3c hopf_project(const Vec3c& F, int c) {
    double nrm = 0.0;
    for (int i = 0; i < 3; ++i) nrm += std::norm(F[i]);
    if (nrm == 0.0) throw InputError(InputError::Code::ZeroField, "hopf_project: zero vector");

    const double target = (c == -1) ? -1.0 : 1.0;
    const double q = herm_product(F, F, c).real();
    if (q * target <= 0.0)
        throw InputError(InputError::Code::DegenerateMetric,
                         "hopf_project: sample cannot be renormalized onto the quadric");
    Vec3c out = F * (1.0 / std::sqrt(q * target));

    for (int i = 0; i < 3; ++i) {
        if (std::abs(out[i]) > 1e-12) {
            const cplx phase = std::conj(out[i]) / std::abs(out[i]);
            return out * phase;
        }
    }
    return out;
}

} // namespace lagsurf
