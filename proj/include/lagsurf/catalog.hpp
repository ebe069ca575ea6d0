#pragma once

#include "lagsurf/surface_data.hpp"

namespace lagsurf {

// Constant solution of the structure equations. Requires
// |phi0|^2 + c e^{u0} = e^{-2 u0} |psi0|^2 to 1e-12; rejected otherwise with
// the constraint residual in the message.
SurfaceData make_constant_solution(const ConformalChart& chart, int c, double u0,
                                   cplx phi0, cplx psi0);

// One-dimensional reduction of the Gauss equation with phi = 0 and psi
// constant: u = u(x) with u'' = -4 c e^u + 4 e^{-2u} |psi0|^2, integrated by
// RK4 at the grid spacing and broadcast along y. Only c = +1 admits bounded
// profiles (oscillation about e^{u*} = |psi0|^{2/3}); c = 0 is accepted only
// with psi0 = 0 (then u is linear in x); c = -1 is rejected.
SurfaceData solve_profile_ode(const ConformalChart& chart, int c, cplx psi0,
                              double u_init, double du_init);

enum class DataFieldId { U, Phi, Psi };

// Gaussian bump eps * direction * exp(-((x-cx)^2 + (y-cy)^2) / width^2).
struct BumpSpec {
    double cx = 0.0;
    double cy = 0.0;
    double width = 0.25;
    cplx direction = 1.0; // real part only is used for u
};

struct PerturbResult {
    SurfaceData data;
    // First-order predicted residual changes, evaluated with the same
    // discrete operators (actual minus input residual should match to O(eps^2)).
    RealField predicted_gauss_delta;
    ComplexField predicted_codazzi_delta;
    ComplexField predicted_closedness_delta;
};

PerturbResult perturb(const SurfaceData& data, DataFieldId which, double eps,
                      const BumpSpec& bump);

} // namespace lagsurf
