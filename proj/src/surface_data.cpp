#include "lagsurf/surface_data.hpp"

#include <cmath>

#include "lagsurf/exec.hpp"

namespace lagsurf {

SurfaceData::SurfaceData(const ConformalChart& chart_, SpaceForm form_, RealField u_,
                         ComplexField phi_, ComplexField psi_)
    : chart(chart_), form(form_), u(std::move(u_)), phi(std::move(phi_)), psi(std::move(psi_)) {
    chart.validate();
    require_same_chart(chart, u.chart(), "SurfaceData u");
    require_same_chart(chart, phi.chart(), "SurfaceData phi");
    require_same_chart(chart, psi.chart(), "SurfaceData psi");
    require_finite(u, "u");
    require_finite(phi, "phi");
    require_finite(psi, "psi");
}

RealField gauss_curvature(const SurfaceData& data) {
    ComplexField uzz = second_zzbar(data.u);
    RealField K(data.chart);
    parallel_for(K.size(), [&](std::size_t i) {
        K[i] = -std::exp(-data.u[i]) * uzz[i].real();
    });
    return K;
}

RealField invariant_identity_residual(const SurfaceData& data) {
    RealField K = gauss_curvature(data);
    RealField out(data.chart);
    const double c = data.c();
    parallel_for(out.size(), [&](std::size_t i) {
        const double eu = std::exp(data.u[i]);
        const double e3u = std::exp(3.0 * data.u[i]);
        out[i] = std::norm(data.psi[i]) - e3u * (std::norm(data.phi[i]) / eu + c - K[i]);
    });
    return out;
}

MaslovForm maslov_form(const SurfaceData& data) {
    MaslovForm m{RealField(data.chart), RealField(data.chart)};
    parallel_for(data.phi.size(), [&](std::size_t i) {
        m.dx_coeff[i] = -2.0 * data.phi[i].real();
        m.dy_coeff[i] = 2.0 * data.phi[i].imag();
    });
    return m;
}

RealField maslov_closedness_residual(const SurfaceData& data) {
    MaslovForm m = maslov_form(data);
    // d(a dx + b dy) = (b_x - a_y) dx ^ dy
    ComplexField bz = derivative(m.dy_coeff, Wirtinger::Dz);
    ComplexField az = derivative(m.dx_coeff, Wirtinger::Dz);
    RealField out(data.chart);
    parallel_for(out.size(), [&](std::size_t i) {
        // For a real field, f_x = 2 Re f_z and f_y = -2 Im f_z.
        const double b_x = 2.0 * bz[i].real();
        const double a_y = -2.0 * az[i].imag();
        out[i] = b_x - a_y;
    });
    return out;
}

DerivedInvariants derived_invariants(const SurfaceData& data) {
    DerivedInvariants d{gauss_curvature(data), RealField(data.chart), maslov_form(data)};
    parallel_for(d.H_norm.size(), [&](std::size_t i) {
        d.H_norm[i] = std::sqrt(2.0) * std::abs(data.phi[i]) * std::exp(-0.5 * data.u[i]);
    });
    return d;
}

} // namespace lagsurf
