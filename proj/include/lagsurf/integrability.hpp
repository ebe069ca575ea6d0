#pragma once

#include "lagsurf/surface_data.hpp"

namespace lagsurf {

// Residuals of the structure equations (left minus right):
//   closedness:  phi_zbar - conj(phi)_z
//   gauss:       u_{z zbar} + |phi|^2 + c e^u - e^{-2u} |psi|^2
//   codazzi:     e^{-2u} psi_zbar - (e^{-u} phi)_z
struct IntegrabilityResiduals {
    ComplexField closedness;
    RealField gauss;
    ComplexField codazzi;
    NormPair closedness_norms;
    NormPair gauss_norms;
    NormPair codazzi_norms;

    double max_linf() const;
    bool pass(double tol) const { return max_linf() <= tol; }
};

IntegrabilityResiduals integrability_residuals(const SurfaceData& data);

// Classification predicates, reported as residual norms plus verdicts.
//   minimal:               max |phi|
//   hamiltonian stationary: ||phi_zbar|| (Phi holomorphic)
//   conformal Maslov:       ||(e^{-u} phi)_z|| (Psi holomorphic)
// psi_holomorphy_cross carries ||e^{-2u} psi_zbar||; when Codazzi holds it
// agrees with the conformal-Maslov residual.
struct ClassifyResult {
    double minimal_residual = 0.0;
    double hamiltonian_residual = 0.0;
    double conformal_maslov_residual = 0.0;
    double psi_holomorphy_cross = 0.0;
    bool minimal = false;
    bool hamiltonian_stationary = false;
    bool conformal_maslov = false;
};

ClassifyResult classify(const SurfaceData& data, double tol);

// (e^{-u} phi)_z as a field; shared by classify and the Bonnet module.
ComplexField conformal_maslov_field(const SurfaceData& data);

// e^{-2u} psi_zbar as a field.
ComplexField weighted_psi_zbar(const SurfaceData& data);

} // namespace lagsurf
