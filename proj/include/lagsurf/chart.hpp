#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "lagsurf/errors.hpp"

namespace lagsurf {

using cplx = std::complex<double>;

// Rectangular grid of a conformal coordinate z = x + iy. On a periodic axis
// the last node is identified with the first, so the spacing divides by n
// rather than n-1.
struct ConformalChart {
    int nx = 0, ny = 0;
    double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
    bool periodic_x = false, periodic_y = false;

    void validate() const;

    double hx() const { return (x_max - x_min) / (periodic_x ? nx : nx - 1); }
    double hy() const { return (y_max - y_min) / (periodic_y ? ny : ny - 1); }
    double x(int ix) const { return x_min + ix * hx(); }
    double y(int iy) const { return y_min + iy * hy(); }
    cplx z(int ix, int iy) const { return {x(ix), y(iy)}; }

    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    std::size_t idx(int ix, int iy) const { return static_cast<std::size_t>(iy) * nx + ix; }

    bool operator==(const ConformalChart&) const = default;
};

class RealField {
public:
    RealField() = default;
    RealField(const ConformalChart& chart, double fill = 0.0)
        : chart_(chart), v_(chart.size(), fill) {}

    const ConformalChart& chart() const { return chart_; }
    double& at(int ix, int iy) { return v_[chart_.idx(ix, iy)]; }
    double at(int ix, int iy) const { return v_[chart_.idx(ix, iy)]; }
    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }
    std::size_t size() const { return v_.size(); }
    std::span<const double> values() const { return v_; }
    std::vector<double>& raw() { return v_; }
    const std::vector<double>& raw() const { return v_; }

private:
    ConformalChart chart_;
    std::vector<double> v_;
};

class ComplexField {
public:
    ComplexField() = default;
    ComplexField(const ConformalChart& chart, cplx fill = {})
        : chart_(chart), v_(chart.size(), fill) {}
    explicit ComplexField(const RealField& r);

    const ConformalChart& chart() const { return chart_; }
    cplx& at(int ix, int iy) { return v_[chart_.idx(ix, iy)]; }
    cplx at(int ix, int iy) const { return v_[chart_.idx(ix, iy)]; }
    cplx& operator[](std::size_t i) { return v_[i]; }
    cplx operator[](std::size_t i) const { return v_[i]; }
    std::size_t size() const { return v_.size(); }
    std::vector<cplx>& raw() { return v_; }
    const std::vector<cplx>& raw() const { return v_; }

private:
    ConformalChart chart_;
    std::vector<cplx> v_;
};

bool all_finite(const RealField& f);
bool all_finite(const ComplexField& f);
void require_finite(const RealField& f, const char* what);
void require_finite(const ComplexField& f, const char* what);
void require_same_chart(const ConformalChart& a, const ConformalChart& b, const char* what);

enum class Wirtinger { Dz, Dzbar };

// Wirtinger derivative d/dz = (d/dx - i d/dy)/2 (resp. d/dzbar with +i).
// Second-order central stencils in the interior, second-order one-sided at
// open boundaries, wrap-around on periodic axes.
ComplexField derivative(const ComplexField& f, Wirtinger which);
ComplexField derivative(const RealField& f, Wirtinger which);

// 4th-order Wirtinger derivative (5-point interior stencils, one-sided at
// open boundaries, nx/ny >= 5). Not the residual-checking operator: the
// structure-equation residuals are defined through the 2nd-order stencils
// above. This variant backs sample differencing in extraction and the
// frame-ODE coefficient fields, where 2nd-order would dominate the error.
ComplexField derivative4(const ComplexField& f, Wirtinger which);
ComplexField derivative4(const RealField& f, Wirtinger which);

// Flat mixed second derivative f_{z zbar} = d_zbar(d_z f), by nesting.
ComplexField second_zzbar(const ComplexField& f);
ComplexField second_zzbar(const RealField& f);

// Laplace-Beltrami operator of the metric 2 e^u dz dzbar:
// Delta_g f = 2 e^{-u} f_{z zbar}.
ComplexField metric_laplacian(const ComplexField& f, const RealField& u);
RealField metric_laplacian(const RealField& f, const RealField& u);

struct NormPair {
    double linf = 0.0;
    double l2 = 0.0;
};

// Norm convention: on open axes the outermost `margin` rings are excluded;
// periodic axes use the full range. The default margin is 2: one-sided
// stencils carry larger constants, and nested second derivatives lose an
// order at the seam cell where the inner stencil switches formula.
NormPair field_norms(const RealField& f, int margin = -1);
NormPair field_norms(const ComplexField& f, int margin = -1);
NormPair field_norms_masked(const RealField& f, const std::vector<std::uint8_t>& mask);
NormPair field_norms_masked(const ComplexField& f, const std::vector<std::uint8_t>& mask);

// Mask helpers shared by the residual bundles: a mask marks cells that enter
// norms. Erosion clears cells within `radius` (Chebyshev) of a cleared cell,
// and clears `radius` boundary rings on open axes.
std::vector<std::uint8_t> erode_mask(const ConformalChart& chart,
                                     const std::vector<std::uint8_t>& mask, int radius);

struct CrResidual {
    RealField field; // |d_zbar f| pointwise
    NormPair norms;  // over the default interior convention
};

// Cauchy-Riemann residual: f is holomorphic iff d_zbar f = 0.
CrResidual cr_residual(const ComplexField& f);

// Counterclockwise rectangular grid loop, corners inclusive.
struct LoopRect {
    int ix0 = 0, iy0 = 0, ix1 = 0, iy1 = 0;
};

enum class WindingStatus { Ok, ZeroOnLoop, PhaseStepTooLarge, NonInteger };

struct WindingResult {
    WindingStatus status = WindingStatus::Ok;
    int index = 0;
    double turns = 0.0;          // raw phase sum / 2 pi
    double min_abs = 0.0;        // min |f| encountered on the loop
    double max_phase_step = 0.0; // largest single-step phase increment
};

// Total phase increment of f around the loop, in full turns, rounded to the
// nearest integer (tolerance 0.25). Steps walk grid edges counterclockwise.
WindingResult winding_index(const ComplexField& f, const LoopRect& loop, double min_abs_floor);

// Pointwise helpers used across the residual modules. All are trivially
// data-parallel and dispatch through parallel_for.
RealField abs_field(const ComplexField& f);
ComplexField conj_field(const ComplexField& f);
RealField real_part(const ComplexField& f);
RealField imag_part(const ComplexField& f);

} // namespace lagsurf
