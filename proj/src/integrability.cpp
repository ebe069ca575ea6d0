#include "lagsurf/integrability.hpp"

#include <algorithm>
#include <cmath>

#include "lagsurf/exec.hpp"

namespace lagsurf {

double IntegrabilityResiduals::max_linf() const {
    return std::max({closedness_norms.linf, gauss_norms.linf, codazzi_norms.linf});
}

IntegrabilityResiduals integrability_residuals(const SurfaceData& data) {
    const ConformalChart& chart = data.chart;
    const double c = data.c();

    ComplexField phi_zbar = derivative(data.phi, Wirtinger::Dzbar);
    ComplexField phibar_z = derivative(conj_field(data.phi), Wirtinger::Dz);
    ComplexField u_zz = second_zzbar(data.u);
    ComplexField psi_zbar = derivative(data.psi, Wirtinger::Dzbar);

    ComplexField emu_phi(chart);
    parallel_for(emu_phi.size(), [&](std::size_t i) {
        emu_phi[i] = std::exp(-data.u[i]) * data.phi[i];
    });
    ComplexField emu_phi_z = derivative(emu_phi, Wirtinger::Dz);

    IntegrabilityResiduals r{ComplexField(chart), RealField(chart), ComplexField(chart), {}, {}, {}};
    parallel_for(chart.size(), [&](std::size_t i) {
        r.closedness[i] = phi_zbar[i] - phibar_z[i];
        const double eu = std::exp(data.u[i]);
        const double em2u = std::exp(-2.0 * data.u[i]);
        r.gauss[i] = u_zz[i].real() + std::norm(data.phi[i]) + c * eu - em2u * std::norm(data.psi[i]);
        r.codazzi[i] = em2u * psi_zbar[i] - emu_phi_z[i];
    });
    r.closedness_norms = field_norms(r.closedness);
    r.gauss_norms = field_norms(r.gauss);
    r.codazzi_norms = field_norms(r.codazzi);
    return r;
}

ComplexField conformal_maslov_field(const SurfaceData& data) {
    ComplexField emu_phi(data.chart);
    parallel_for(emu_phi.size(), [&](std::size_t i) {
        emu_phi[i] = std::exp(-data.u[i]) * data.phi[i];
    });
    return derivative(emu_phi, Wirtinger::Dz);
}

ComplexField weighted_psi_zbar(const SurfaceData& data) {
    ComplexField psi_zbar = derivative(data.psi, Wirtinger::Dzbar);
    ComplexField out(data.chart);
    parallel_for(out.size(), [&](std::size_t i) {
        out[i] = std::exp(-2.0 * data.u[i]) * psi_zbar[i];
    });
    return out;
}

ClassifyResult classify(const SurfaceData& data, double tol) {
    ClassifyResult res;
    res.minimal_residual = field_norms(abs_field(data.phi)).linf;
    res.hamiltonian_residual = field_norms(derivative(data.phi, Wirtinger::Dzbar)).linf;
    res.conformal_maslov_residual = field_norms(conformal_maslov_field(data)).linf;
    res.psi_holomorphy_cross = field_norms(weighted_psi_zbar(data)).linf;
    res.minimal = res.minimal_residual <= tol;
    res.hamiltonian_stationary = res.hamiltonian_residual <= tol;
    res.conformal_maslov = res.conformal_maslov_residual <= tol;
    return res;
}

} // namespace lagsurf
