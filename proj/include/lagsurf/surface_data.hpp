#pragma once

#include "lagsurf/chart.hpp"

namespace lagsurf {

// Ambient space form: CH^2 (c=-1), C^2 (c=0) or CP^2 (c=+1), holomorphic
// sectional curvature 4c.
class SpaceForm {
public:
    explicit SpaceForm(int c) : c_(c) {
        if (c != -1 && c != 0 && c != 1)
            throw InputError(InputError::Code::InvalidC, "space form constant c must be -1, 0 or +1");
    }
    int c() const { return c_; }
    bool operator==(const SpaceForm&) const = default;

private:
    int c_;
};

// The fundamental data triple: metric factor u (g = 2 e^u dz dzbar), mean
// curvature coefficient phi (Phi = phi dz) and cubic Hopf coefficient psi
// (Psi = psi dz^3).
struct SurfaceData {
    ConformalChart chart;
    SpaceForm form;
    RealField u;
    ComplexField phi;
    ComplexField psi;

    SurfaceData(const ConformalChart& chart_, SpaceForm form_, RealField u_,
                ComplexField phi_, ComplexField psi_);

    int c() const { return form.c(); }
};

// Gauss curvature of g = 2 e^u dz dzbar, from the metric alone:
// K = -e^{-u} u_{z zbar}.
RealField gauss_curvature(const SurfaceData& data);

// Pointwise |psi|^2 - e^{3u} (e^{-u} |phi|^2 + c - K). Vanishes exactly when
// the Gauss equation holds, and equals -e^{2u} * (Gauss residual) because K
// is built from the metric.
RealField invariant_identity_residual(const SurfaceData& data);

// Maslov form sigma_H = -(Phi + conj(Phi)) in the real basis:
// (-2 Re phi) dx + (2 Im phi) dy.
struct MaslovForm {
    RealField dx_coeff;
    RealField dy_coeff;
};
MaslovForm maslov_form(const SurfaceData& data);

// Exterior-derivative coefficient of sigma_H (d sigma_H = coeff dx ^ dy).
// Equals -2i times the closedness residual phi_zbar - conj(phi)_z.
RealField maslov_closedness_residual(const SurfaceData& data);

struct DerivedInvariants {
    RealField K;
    RealField H_norm; // |H| = sqrt(2) |phi| e^{-u/2}
    MaslovForm maslov;
};
DerivedInvariants derived_invariants(const SurfaceData& data);

} // namespace lagsurf
