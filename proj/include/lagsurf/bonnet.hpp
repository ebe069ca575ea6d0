#pragma once

#include <cstdint>
#include <vector>

#include "lagsurf/reconstruction.hpp"
#include "lagsurf/surface_data.hpp"

namespace lagsurf {

// Residuals of the Bonnet-deformation admissibility criteria, each a field
// plus norms over an eroded mask (cells near zeros of psi and open
// boundaries are excluded; two derivative layers need radius-2 erosion).
//
// r_loglap and r_admis are equivalent (r_admis = r_loglap / conj(psi) pointwise); r_admis is the
// criterion, r_loglap the cross-check. r_arglap equals r_iso analytically; they are
// computed along two different numerical routes.
struct AdmissibilityBundle {
    ComplexField r_loglap;     // (psi_zbar/psi)_z - |psi_zbar/psi|^2
    ComplexField r_admis;     // (psi_zbar/|psi|^2)_z
    ComplexField r_ratio;     // ((e^{-u}phi)_z / (|phi|^2 + e^u(c-K)))_z
    RealField r_loggauss;        // (log e^{3u}(e^{-u}|phi|^2+c-K))_{z zbar} - 2e^u |(e^{-u}phi)_z|^2 / (...)
    RealField r_arglap;        // Laplacian of arg psi via the alpha_z route
    RealField r_iso;      // Im (log psi)_{z zbar} (isothermic criterion)
    ComplexField r_invpsi; // (1/psi)_{z zbar}
    std::vector<std::uint8_t> mask;      // norm mask for r_loglap/r_admis/r_arglap/r_iso/r_invpsi
    std::vector<std::uint8_t> mask_gauss; // norm mask for r_ratio/r_loggauss (denominator guarded)
    NormPair n_loglap, n_admis, n_ratio, n_loggauss, n_arglap, n_iso, n_invpsi;
};

AdmissibilityBundle bonnet_admissibility(const SurfaceData& data, double floor_rel = 1e-3);

// Deformation parameter field t (psi* = e^{it} psi), continuous along the
// integration tree, plus the worst plaquette closure defect.
struct DeformationState {
    RealField t;
    double closure_defect = 0.0;
};

// Integrates the total differential system
//   dt = i (1 - e^{-it}) (psi_zbar/psi) dzbar - i (1 - e^{it}) (conj psi_z/conj psi) dz
// along the row-then-column sweep with RK4 steps at the grid spacing.
DeformationState integrate_pfaff(const SurfaceData& data, double t0, GridPoint base,
                                 double admissibility_tol = -1.0,
                                 CoeffInterp interp = CoeffInterp::Cubic);

// psi -> e^{it} psi; u and phi are unchanged and |psi*| = |psi| pointwise.
SurfaceData deform(const SurfaceData& data, const RealField& t);
SurfaceData deform(const SurfaceData& data, const DeformationState& state);

// Harmonic completion: h = (r + i s)/2 with s the harmonic conjugate of r,
// path-integrated from the base (gauge s(base) = 0), so that h + conj h = r.
struct CompletionResult {
    ComplexField h;
    double harmonic_residual_linf = 0.0;
    double cr_linf = 0.0;
};

CompletionResult holomorphic_completion(const RealField& r, GridPoint base,
                                        double harmonic_tol = -1.0);

// Checks of the 1/psi = h + conj h structure: consistency of the e^{2u}
// expressions, s-independence after the w = int dz/h_z change of variable
// (computed by chain rule: f_s = (conj(h_z) f_zbar - h_z f_z)/(2i)), the
// holomorphic-h ODE, and the geometric ratio Q = |h_z|^2/(h + conj h).
struct HStructureBundle {
    RealField r24_direct;     // |psi_zbar/(e^{-u}phi)_z - e^{2u}|
    RealField r24_h;          // |-conj(h_z)... expression via h - e^{2u}|
    RealField tonly_mean_curv; // s-derivative of e^{-u} phi
    RealField tonly_e2u_over_hz;
    RealField tonly_psi_ratio; // s-derivative of |psi|/|h_z|
    RealField q_geom;          // |h_z|^2/(h+conj h)
    RealField tonly_qgeom;
    ComplexField r_hode;       // h_zz(h+hbar) - h_z^2 minus its conjugate
    std::vector<std::uint8_t> mask;
    std::vector<std::uint8_t> mask_r24;
    NormPair n24_direct, n24_h, n_tonly_mean_curv, n_tonly_e2u, n_tonly_psi, n_tonly_qgeom, n_hode;
    bool tonly_applicable = false;    // phi real-valued within tolerance
    bool tonly_informational = false; // c != 0: reported, never pass/fail
};

HStructureBundle h_structure_checks(const SurfaceData& data, const ComplexField& h,
                                    double floor_rel = 1e-3);

// An isolated zero with its winding index.
struct UmbilicPoint {
    int ix = 0, iy = 0;
    int index = 0;
    double margin = 0.0; // min |field| on the winding loop
};

struct UmbilicReport {
    std::vector<UmbilicPoint> points;
    int degree = 0;
    int boundary_clusters = 0; // clusters whose index is undefined (open edge)
    bool genus1_applicable = false; // doubly periodic chart
    bool genus1_consistent = false; // degree 0 and no umbilics
};

// Cells below floor_rel * median(|field|) are clustered (merge radius 2);
// each cluster is indexed by the winding number on a surrounding loop.
UmbilicReport umbilic_analysis(const ComplexField& field, double floor_rel = 1e-3);

// Bonnet-pair decomposition psi_1 = h(i alpha + 1)/2, psi_2 = h(i alpha - 1)/2.
struct PairDecomposition {
    ComplexField h; // psi1 - psi2 (holomorphic for genuine pairs)
    ComplexField q; // psi1 + psi2
    RealField alpha;
    std::vector<std::uint8_t> direct_mask; // |h| > floor: alpha = -i q/h
    UmbilicReport umbilics;                // zeros of h with indices
    double h_cr_linf = 0.0;
    double modulus_mismatch_linf = 0.0; // || |psi1| - |psi2| ||
    double alpha_imag_linf = 0.0;
    std::vector<GridPoint> fallback_cells; // filled by nearest-mask extension
};

PairDecomposition pair_decompose(const ComplexField& psi1, const ComplexField& psi2,
                                 double floor_rel = 1e-3);

std::pair<ComplexField, ComplexField> pair_compose(const ComplexField& h, const RealField& alpha);

// Lawson-Tribuzy diagnostics: continuous branch theta of arg(psi2/psi1) in
// (0, 2pi), Q = 1 - e^{i theta}, and the metric Laplacians of log|Q| and
// arg Q (= (theta - pi)/2 on the chosen branch).
struct LtDiagnostics {
    RealField theta;
    ComplexField Q;
    RealField lap_log_absQ;
    RealField lap_argQ;
    std::vector<std::uint8_t> mask;
    NormPair lap_arg_norms, lap_logabs_norms;
    bool arg_harmonic = false;
    int logabs_positive_cells = 0; // cells where Delta log|Q| > tol
    double logabs_max = 0.0;       // signed max of Delta log|Q|
    double holonomy_defect = 0.0;
    bool branch_ok = true;
    GridPoint holonomy_location;
    double range_violation = 0.0; // branch excursion outside (0, 2pi)
};

LtDiagnostics lt_diagnostics(const ComplexField& psi1, const ComplexField& psi2,
                             const RealField& u, double tol, double floor_rel = 1e-3);

} // namespace lagsurf
