#include "lagsurf/extraction.hpp"

#include <algorithm>
#include <cmath>

#include "lagsurf/exec.hpp"

namespace lagsurf {



namespace {

struct ComponentFields {
    std::vector<ComplexField> comp; // per ambient component

    ComponentFields(const ConformalChart& chart, int n) : comp(n, ComplexField(chart)) {}
};

template <class Fetch>
ComponentFields sample_components(const ConformalChart& chart, int n, const Fetch& fetch) {
    ComponentFields f(chart, n);
    for (int k = 0; k < n; ++k) {
        parallel_for(chart.size(), [&](std::size_t i) { f.comp[k][i] = fetch(i, k); });
    }
    return f;
}

ComponentFields apply(const ComponentFields& f, Wirtinger which) {
    ComponentFields out(f.comp.front().chart(), static_cast<int>(f.comp.size()));
    for (std::size_t k = 0; k < f.comp.size(); ++k)
        out.comp[k] = derivative4(f.comp[k], which);
    return out;
}

template <int N>
VecC<N> at_point(const ComponentFields& f, std::size_t i) {
    VecC<N> v;
    for (int k = 0; k < N; ++k) v[k] = f.comp[k][i];
    return v;
}

} // namespace

ExtractionResult extract_data(const Immersion& imm, double metric_floor, double quadric_tol) {
    const ConformalChart& chart = imm.chart;
    chart.validate();

    RealField u(chart);
    ComplexField phi(chart), psi(chart);
    RealField conf(chart), lagr(chart);
    std::vector<double> metric_vals(chart.size());
    double max_quadric = 0.0;

    if (imm.c == 0) {
        const ComponentFields f =
            sample_components(chart, 4, [&](std::size_t i, int k) { return cplx(imm.points[i][k], 0.0); });
        const ComponentFields fz = apply(f, Wirtinger::Dz);
        const ComponentFields fzb = apply(f, Wirtinger::Dzbar);
        const ComponentFields fzz = apply(fz, Wirtinger::Dz);
        const ComponentFields fzzb = apply(fz, Wirtinger::Dzbar);

        parallel_for(chart.size(), [&](std::size_t i) {
            const Vec4c vz = at_point<4>(fz, i);
            const Vec4c vzb = at_point<4>(fzb, i);
            const Vec4c vzz = at_point<4>(fzz, i);
            const Vec4c vzzb = at_point<4>(fzzb, i);
            const double metric = bilinear_r4(vz, vzb).real();
            metric_vals[i] = metric;
            const double safe = std::max(metric, metric_floor);
            u[i] = std::log(safe);
            const Vec4c jvz = apply_J(vz);
            phi[i] = bilinear_r4(vzzb, jvz) / safe;
            psi[i] = bilinear_r4(vzz, jvz);
            conf[i] = std::abs(bilinear_r4(vz, vz));
            lagr[i] = std::abs(bilinear_r4(vz, apply_J(vzb)));
        });
    } else {
        const int c = imm.c;
        const ComponentFields F =
            sample_components(chart, 3, [&](std::size_t i, int k) { return imm.lift[i][k]; });
        const ComponentFields Fz = apply(F, Wirtinger::Dz);
        const ComponentFields Fzb = apply(F, Wirtinger::Dzbar);
        const ComponentFields Fzz = apply(Fz, Wirtinger::Dz);
        const ComponentFields Fzzb = apply(Fz, Wirtinger::Dzbar);
        const ComponentFields Fzbzb = apply(Fzb, Wirtinger::Dzbar);

        std::vector<double> qv(chart.size());
        parallel_for(chart.size(), [&](std::size_t i) {
            const Vec3c vF = at_point<3>(F, i);
            const Vec3c vz = at_point<3>(Fz, i);
            const Vec3c vzb = at_point<3>(Fzb, i);
            const double target = (c == -1) ? -1.0 : 1.0;
            qv[i] = std::abs(herm_product(vF, vF, c) - target);

            // Complexified bilinear pairing through the (1,0)/(0,1) parts:
            // <V, W> = (Herm(A_V, conj(B_W)) + ...)/2 with B(F_z) = conj(A(F_zbar)).
            const cplx hzz = herm_product(vz, vz, c);
            const cplx hbb = herm_product(vzb, vzb, c);
            const double metric = 0.5 * (hzz + hbb).real();
            metric_vals[i] = metric;
            const double safe = std::max(metric, metric_floor);
            u[i] = std::log(safe);

            // psi = <F_zz, J F_z>: A-parts (dz dz F, i dz F), B-parts from the
            // zbar ladder. <V,W> = (A_V.eps.B_W + B_V.eps.A_W)/2 where
            // x.eps.y = sum eps_k x_k y_k (no conjugation).
            auto eps_dot = [&](const Vec3c& a, const Vec3c& b) {
                const double eps0 = (c == -1) ? -1.0 : 1.0;
                return eps0 * a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            };
            auto conj_vec = [](const Vec3c& a) {
                Vec3c r;
                for (int k = 0; k < 3; ++k) r[k] = std::conj(a[k]);
                return r;
            };
            const Vec3c vzz = at_point<3>(Fzz, i);
            const Vec3c vzzb = at_point<3>(Fzzb, i);
            const Vec3c vzbzb = at_point<3>(Fzbzb, i);
            const cplx iu(0.0, 1.0);
            // pair(F_z) = (Fz, conj(Fzb)); pair(F_zz) = (Fzz, conj(Fzbzb));
            // pair(F_zzb) = (Fzzb, conj(Fzzb-bar side)) with the mixed
            // derivative self-paired: B(F_zzb) = conj(dzbar dz of conj F)
            // = conj(F_zzb) computed from the zbar-then-z ladder; the two
            // mixed orders agree for the stencils used here.
            const Vec3c A_jfz = vz * iu;
            const Vec3c B_jfz = conj_vec(vzb) * (-iu);
            psi[i] = 0.5 * (eps_dot(vzz, B_jfz) + eps_dot(conj_vec(vzbzb), A_jfz));
            phi[i] = 0.5 * (eps_dot(vzzb, B_jfz) + eps_dot(conj_vec(vzzb), A_jfz)) / safe;

            conf[i] = std::abs(herm_product(vz, vzb, c));
            lagr[i] = std::max(std::abs(herm_product(vz, vF, c).imag()),
                               std::abs(herm_product(vzb, vF, c).imag()));
        });
        max_quadric = det_max_abs(qv);
        if (max_quadric > quadric_tol)
            throw InputError(InputError::Code::DegenerateMetric,
                             "extract_data: lift samples violate the quadric constraint");
    }

    double min_metric = metric_vals[0];
    for (double m : metric_vals) min_metric = std::min(min_metric, m);
    if (min_metric <= metric_floor)
        throw InputError(InputError::Code::DegenerateMetric,
                         "extract_data: degenerate metric, <f_z, f_zbar> fell below the floor");

    ExtractionResult res{
        SurfaceData(chart, SpaceForm(imm.c), std::move(u), std::move(phi), std::move(psi)),
        std::move(conf),
        std::move(lagr),
        {},
        {},
        min_metric,
        max_quadric};
    res.conformality_norms = field_norms(res.conformality_residual);
    res.lagrangian_norms = field_norms(res.lagrangian_residual);
    return res;
}

DataDistance data_distance(const SurfaceData& a, const SurfaceData& b, double tol) {
    require_same_chart(a.chart, b.chart, "data_distance");
    if (a.c() != b.c())
        throw InputError(InputError::Code::ChartMismatch, "data_distance: space forms differ");

    RealField du(a.chart);
    ComplexField dphi(a.chart), dpsi(a.chart);
    parallel_for(a.chart.size(), [&](std::size_t i) {
        du[i] = a.u[i] - b.u[i];
        dphi[i] = a.phi[i] - b.phi[i];
        dpsi[i] = a.psi[i] - b.psi[i];
    });
    DataDistance d;
    d.du = field_norms(du).linf;
    d.dphi = field_norms(dphi).linf;
    d.dpsi = field_norms(dpsi).linf;
    d.congruent = d.du <= tol && d.dphi <= tol && d.dpsi <= tol;
    return d;
}

} // namespace lagsurf
