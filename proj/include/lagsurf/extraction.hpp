#pragma once

#include "lagsurf/reconstruction.hpp"

namespace lagsurf {

struct ExtractionResult {
    SurfaceData data;
    RealField conformality_residual; // |<f_z, f_z>| per point
    RealField lagrangian_residual;   // |<f_z, J f_zbar>| (c=0) or horizontality (lifts)
    NormPair conformality_norms;
    NormPair lagrangian_norms;
    double min_metric = 0.0;           // min <f_z, f_zbar> encountered
    double max_quadric_violation = 0.0; // lifts only
};

// Recover (u, phi, psi) from sampled immersion points:
//   u = log <f_z, f_zbar>, phi = e^{-u} <f_{z zbar}, J f_z>, psi = <f_{zz}, J f_z>.
// Sample derivatives use dedicated 4th-order stencils (interior central,
// one-sided at open boundaries); the chart module's 2nd-order operators are
// not accurate enough for the round-trip tolerances at desk resolutions.
ExtractionResult extract_data(const Immersion& imm, double metric_floor = 1e-10,
                              double quadric_tol = 1e-4);

struct DataDistance {
    double du = 0.0, dphi = 0.0, dpsi = 0.0;
    bool congruent = false;
};

// L-inf distances of the three fields over the interior-norm convention.
// After the canonical base gauge, congruence is plain field equality.
DataDistance data_distance(const SurfaceData& a, const SurfaceData& b, double tol);



} // namespace lagsurf
