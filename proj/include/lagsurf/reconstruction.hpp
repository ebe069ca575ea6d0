#pragma once

#include <array>
#include <variant>
#include <vector>

#include "lagsurf/linalg.hpp"
#include "lagsurf/surface_data.hpp"

namespace lagsurf {

struct GridPoint {
    int ix = 0, iy = 0;
    bool operator==(const GridPoint&) const = default;
};

// Moving frame for c = 0: sigma columns are the complexified vectors
// (f_z, f_zbar, J f_z, J f_zbar) in the real coordinates of R^4, plus the
// base point. Columns 3 and 4 stay equal to J applied to columns 1 and 2
// under the flow; the integrator reports any violation as drift.
struct FrameC2 {
    Mat4c sigma;
    Vec4c f;
};

// Horizontal lift frame for c = +-1: columns (F, F_z, F_zbar) in C^3. The
// ambient Hermitian form is -z0 w0bar + z1 w1bar + z2 w2bar for c = -1 and
// the standard one for c = +1.
struct FrameLift {
    Mat3c cols;
};

using Frame = std::variant<FrameC2, FrameLift>;

// Frame-equation coefficient matrices: sigma_z = sigma U, sigma_zbar = sigma V.
struct CoeffC2 {
    Mat4c U, V;
};
struct CoeffLift {
    Mat3c U, V;
};

CoeffC2 coefficient_matrices_c2(const SurfaceData& data, GridPoint p);
CoeffLift coefficient_matrices_lift(const SurfaceData& data, GridPoint p);

namespace detail {
// The F-coefficient of F_{z zbar} must be -c e^u F for the frame flow to be
// compatible exactly when the Gauss equation holds with +c e^u; the flipped
// sign is exposed so tests can demonstrate the incompatibility.
CoeffLift coefficient_matrices_lift_signed(const SurfaceData& data, GridPoint p, double f_term_sign);
} // namespace detail

// Ambient complex structure on R^4 ~ C^2 and the complexified bilinear form.
Vec4c apply_J(const Vec4c& v);
cplx bilinear_r4(const Vec4c& a, const Vec4c& b);
// Hermitian product sum eps_k a_k conj(b_k); eps = (-1,1,1) for c = -1.
cplx herm_product(const Vec3c& a, const Vec3c& b, int c);

// Worst violation of the frame-invariant set at a single point. Fields not
// applicable to the branch stay zero.
struct DriftReport {
    double conformal_null = 0.0; // <f_z,f_z> resp. <F_z,F_z>
    double conformal_pair = 0.0; // <f_z,f_zbar> - e^u
    double lagrangian = 0.0;     // <f_z, J f_zbar>
    double jlink = 0.0;          // columns 3,4 vs J columns 1,2 (c=0)
    double reality = 0.0;        // f_zbar vs conj(f_z), Im of position (c=0)
    double quadric = 0.0;        // (F,F) -+ 1 (lifts)
    double horizontality = 0.0;  // Re(F_z, iF), Re(F_zbar, iF) (lifts)

    double max() const;
    void merge(const DriftReport& o);
};

DriftReport frame_invariant_drift(const SurfaceData& data, GridPoint p, const Frame& frame);

// Canonical adapted frame at the base point: base maps to the origin (c = 0)
// or to (1,0,0) (c = +-1), with coordinate axes along f_x, f_y.
Frame initial_frame(const SurfaceData& data, GridPoint base);

enum class CoeffInterp { Linear, Cubic };

struct IntegrateOptions {
    CoeffInterp interp = CoeffInterp::Cubic;
    bool project_quadric = false; // renormalize (F,F) after each step
};

struct PathResult {
    std::vector<Frame> frames; // one per node, including the start
    DriftReport drift;
};

// Classical RK4 on the linear frame system along an axis-aligned polyline of
// grid points, one step per grid edge. Off-node coefficients come from
// interpolating the precomputed u, u_z, phi, psi fields along the leg.
PathResult integrate_frame_path(const SurfaceData& data, const std::vector<GridPoint>& waypoints,
                                const Frame& frame0, const IntegrateOptions& opts = {});

struct Immersion {
    ConformalChart chart;
    int c = 0;
    std::vector<std::array<double, 4>> points; // c == 0 (R^4 ~ C^2 samples)
    std::vector<Vec3c> lift;                   // c != 0
    std::vector<Vec3c> projective;             // c != 0, Hopf representatives
    double max_quadric_violation = 0.0;
};

struct ReconstructOptions {
    double tol = 1e-8;
    bool override_integrability = false;
    IntegrateOptions integrate;
    int probes = 5; // probe lattice size per axis for the cross-defect
};

struct ReconstructionResult {
    Immersion immersion;
    double cross_defect = 0.0;
    DriftReport drift;
    double integrability_linf = 0.0;
    std::vector<Frame> frames; // per grid node, row-major
};

// Row-then-column sweep from the base node. The cross-defect re-integrates
// column-then-row paths to a probe lattice and reports the worst disagreement.
ReconstructionResult reconstruct_grid(const SurfaceData& data, GridPoint base,
                                      const ReconstructOptions& opts = {});

// Operator-norm distance between the frame transported around the loop and
// the initial frame. Exactly zero curvature data transports to itself.
double monodromy_defect(const SurfaceData& data, const LoopRect& loop,
                        const IntegrateOptions& opts = {});

// Remove the Hopf fiber phase: renormalize onto the quadric, then rotate so
// the first component above threshold is real positive.
Vec3c hopf_project(const Vec3c& F, int c);

} // namespace lagsurf
