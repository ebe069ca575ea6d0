#include "lagsurf/chart.hpp"

#include <algorithm>
#include <cmath>

#include "lagsurf/exec.hpp"

namespace lagsurf {

void ConformalChart::validate() const {
    if (nx < 4 || ny < 4)
        throw InputError(InputError::Code::BadChart, "chart: nx and ny must be >= 4");
    if (!(x_max > x_min) || !(y_max > y_min))
        throw InputError(InputError::Code::BadChart, "chart: require x_max > x_min and y_max > y_min");
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(y_min) || !std::isfinite(y_max))
        throw InputError(InputError::Code::BadChart, "chart: non-finite bounds");
}

ComplexField::ComplexField(const RealField& r) : chart_(r.chart()), v_(r.size()) {
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] = cplx(r[i], 0.0);
}

bool all_finite(const RealField& f) {
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!std::isfinite(f[i])) return false;
    return true;
}

bool all_finite(const ComplexField& f) {
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!std::isfinite(f[i].real()) || !std::isfinite(f[i].imag())) return false;
    return true;
}

void require_finite(const RealField& f, const char* what) {
    if (!all_finite(f))
        throw InputError(InputError::Code::NonFinite, std::string("non-finite values in ") + what);
}

void require_finite(const ComplexField& f, const char* what) {
    if (!all_finite(f))
        throw InputError(InputError::Code::NonFinite, std::string("non-finite values in ") + what);
}

void require_same_chart(const ConformalChart& a, const ConformalChart& b, const char* what) {
    if (!(a == b))
        throw InputError(InputError::Code::ChartMismatch, std::string("chart mismatch in ") + what);
}

namespace {

// One-dimensional second-order first derivative along one axis. `get(i)`
// reads the 1-D line; n, h and periodic describe the axis.
template <class Get>
inline cplx axis_derivative(const Get& get, int i, int n, double h, bool periodic) {
    if (periodic) {
        const int ip = (i + 1) % n;
        const int im = (i - 1 + n) % n;
        return (get(ip) - get(im)) / (2.0 * h);
    }
    if (i == 0) return (-3.0 * get(0) + 4.0 * get(1) - get(2)) / (2.0 * h);
    if (i == n - 1) return (3.0 * get(n - 1) - 4.0 * get(n - 2) + get(n - 3)) / (2.0 * h);
    return (get(i + 1) - get(i - 1)) / (2.0 * h);
}

ComplexField wirtinger(const ComplexField& f, Wirtinger which) {
    require_finite(f, "derivative input");
    const ConformalChart& c = f.chart();
    ComplexField out(c);
    const double hx = c.hx(), hy = c.hy();
    const cplx iunit(0.0, 1.0);
    const cplx sign = (which == Wirtinger::Dz) ? -iunit : iunit;
    parallel_for(static_cast<std::size_t>(c.ny), [&](std::size_t row) {
        const int iy = static_cast<int>(row);
        for (int ix = 0; ix < c.nx; ++ix) {
            const cplx dx = axis_derivative([&](int i) { return f.at(i, iy); }, ix, c.nx, hx, c.periodic_x);
            const cplx dy = axis_derivative([&](int j) { return f.at(ix, j); }, iy, c.ny, hy, c.periodic_y);
            out.at(ix, iy) = 0.5 * (dx + sign * dy);
        }
    });
    return out;
}

} // namespace

ComplexField derivative(const ComplexField& f, Wirtinger which) { return wirtinger(f, which); }

ComplexField derivative(const RealField& f, Wirtinger which) {
    return wirtinger(ComplexField(f), which);
}

namespace {

template <class Get>
inline cplx axis_derivative4(const Get& get, int i, int n, double h, bool periodic) {
    if (periodic) {
        auto at = [&](int k) { return get((k % n + n) % n); };
        return (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * h);
    }
    if (i == 0)
        return (-25.0 * get(0) + 48.0 * get(1) - 36.0 * get(2) + 16.0 * get(3) - 3.0 * get(4)) /
               (12.0 * h);
    if (i == 1)
        return (-3.0 * get(0) - 10.0 * get(1) + 18.0 * get(2) - 6.0 * get(3) + get(4)) / (12.0 * h);
    if (i == n - 1)
        return (25.0 * get(n - 1) - 48.0 * get(n - 2) + 36.0 * get(n - 3) - 16.0 * get(n - 4) +
                3.0 * get(n - 5)) /
               (12.0 * h);
    if (i == n - 2)
        return (3.0 * get(n - 1) + 10.0 * get(n - 2) - 18.0 * get(n - 3) + 6.0 * get(n - 4) -
                get(n - 5)) /
               (12.0 * h);
    return (-get(i + 2) + 8.0 * get(i + 1) - 8.0 * get(i - 1) + get(i - 2)) / (12.0 * h);
}

} // namespace

ComplexField derivative4(const ComplexField& f, Wirtinger which) {
    require_finite(f, "derivative4 input");
    const ConformalChart& c = f.chart();
    if (c.nx < 5 || c.ny < 5)
        throw InputError(InputError::Code::BadChart, "derivative4 requires at least a 5x5 grid");
    ComplexField out(c);
    const double hx = c.hx(), hy = c.hy();
    const cplx iunit(0.0, 1.0);
    const cplx sign = (which == Wirtinger::Dz) ? -iunit : iunit;
    parallel_for(static_cast<std::size_t>(c.ny), [&](std::size_t row) {
        const int iy = static_cast<int>(row);
        for (int ix = 0; ix < c.nx; ++ix) {
            const cplx dx =
                axis_derivative4([&](int i) { return f.at(i, iy); }, ix, c.nx, hx, c.periodic_x);
            const cplx dy =
                axis_derivative4([&](int j) { return f.at(ix, j); }, iy, c.ny, hy, c.periodic_y);
            out.at(ix, iy) = 0.5 * (dx + sign * dy);
        }
    });
    return out;
}

ComplexField derivative4(const RealField& f, Wirtinger which) {
    return derivative4(ComplexField(f), which);
}

ComplexField second_zzbar(const ComplexField& f) {
    return derivative(derivative(f, Wirtinger::Dz), Wirtinger::Dzbar);
}

ComplexField second_zzbar(const RealField& f) { return second_zzbar(ComplexField(f)); }

ComplexField metric_laplacian(const ComplexField& f, const RealField& u) {
    require_same_chart(f.chart(), u.chart(), "metric_laplacian");
    ComplexField fzz = second_zzbar(f);
    ComplexField out(f.chart());
    parallel_for(f.size(), [&](std::size_t i) { out[i] = 2.0 * std::exp(-u[i]) * fzz[i]; });
    return out;
}

RealField metric_laplacian(const RealField& f, const RealField& u) {
    ComplexField lap = metric_laplacian(ComplexField(f), u);
    return real_part(lap);
}

namespace {

std::vector<std::uint8_t> margin_mask(const ConformalChart& c, int margin) {
    std::vector<std::uint8_t> m(c.size(), 1);
    if (margin <= 0) return m;
    // Clamp per axis so the mask never empties on minimum-size charts.
    const int mx = std::min(margin, (c.nx - 1) / 2);
    const int my = std::min(margin, (c.ny - 1) / 2);
    for (int iy = 0; iy < c.ny; ++iy) {
        for (int ix = 0; ix < c.nx; ++ix) {
            const bool cut_x = !c.periodic_x && (ix < mx || ix >= c.nx - mx);
            const bool cut_y = !c.periodic_y && (iy < my || iy >= c.ny - my);
            if (cut_x || cut_y) m[c.idx(ix, iy)] = 0;
        }
    }
    return m;
}

template <class AbsAt>
NormPair norms_over(const ConformalChart& c, const std::vector<std::uint8_t>& mask, const AbsAt& abs_at) {
    std::vector<double> vals(c.size(), 0.0);
    std::vector<double> sq(c.size(), 0.0);
    parallel_for(c.size(), [&](std::size_t i) {
        if (!mask[i]) return;
        const double a = abs_at(i);
        vals[i] = a;
        sq[i] = a * a;
    });
    NormPair n;
    n.linf = det_max_abs(vals);
    n.l2 = std::sqrt(det_sum(sq) * c.hx() * c.hy());
    return n;
}

} // namespace

std::vector<std::uint8_t> erode_mask(const ConformalChart& chart,
                                     const std::vector<std::uint8_t>& mask, int radius) {
    std::vector<std::uint8_t> cur = mask;
    const auto border = margin_mask(chart, radius);
    std::vector<std::uint8_t> out(chart.size());
    for (int pass = 0; pass < radius; ++pass) {
        for (int iy = 0; iy < chart.ny; ++iy) {
            for (int ix = 0; ix < chart.nx; ++ix) {
                std::uint8_t keep = cur[chart.idx(ix, iy)];
                for (int dy = -1; dy <= 1 && keep; ++dy) {
                    for (int dx = -1; dx <= 1 && keep; ++dx) {
                        int jx = ix + dx, jy = iy + dy;
                        if (chart.periodic_x) jx = (jx + chart.nx) % chart.nx;
                        if (chart.periodic_y) jy = (jy + chart.ny) % chart.ny;
                        if (jx < 0 || jx >= chart.nx || jy < 0 || jy >= chart.ny) continue;
                        if (!cur[chart.idx(jx, jy)]) keep = 0;
                    }
                }
                out[chart.idx(ix, iy)] = keep;
            }
        }
        cur = out;
    }
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = cur[i] && border[i];
    return cur;
}

NormPair field_norms(const RealField& f, int margin) {
    const auto mask = margin_mask(f.chart(), margin < 0 ? 2 : margin);
    return norms_over(f.chart(), mask, [&](std::size_t i) { return std::abs(f[i]); });
}

NormPair field_norms(const ComplexField& f, int margin) {
    const auto mask = margin_mask(f.chart(), margin < 0 ? 2 : margin);
    return norms_over(f.chart(), mask, [&](std::size_t i) { return std::abs(f[i]); });
}

NormPair field_norms_masked(const RealField& f, const std::vector<std::uint8_t>& mask) {
    return norms_over(f.chart(), mask, [&](std::size_t i) { return std::abs(f[i]); });
}

NormPair field_norms_masked(const ComplexField& f, const std::vector<std::uint8_t>& mask) {
    return norms_over(f.chart(), mask, [&](std::size_t i) { return std::abs(f[i]); });
}

CrResidual cr_residual(const ComplexField& f) {
    ComplexField dzb = derivative(f, Wirtinger::Dzbar);
    CrResidual r;
    r.field = abs_field(dzb);
    r.norms = field_norms(r.field);
    return r;
}

WindingResult winding_index(const ComplexField& f, const LoopRect& loop, double min_abs_floor) {
    const ConformalChart& c = f.chart();
    if (loop.ix0 < 0 || loop.iy0 < 0 || loop.ix1 >= c.nx || loop.iy1 >= c.ny ||
        loop.ix0 >= loop.ix1 || loop.iy0 >= loop.iy1)
        throw InputError(InputError::Code::PathOffChart, "winding loop outside chart or degenerate");

    std::vector<cplx> samples;
    samples.reserve(2 * (loop.ix1 - loop.ix0 + loop.iy1 - loop.iy0) + 1);
    for (int ix = loop.ix0; ix <= loop.ix1; ++ix) samples.push_back(f.at(ix, loop.iy0));
    for (int iy = loop.iy0 + 1; iy <= loop.iy1; ++iy) samples.push_back(f.at(loop.ix1, iy));
    for (int ix = loop.ix1 - 1; ix >= loop.ix0; --ix) samples.push_back(f.at(ix, loop.iy1));
    for (int iy = loop.iy1 - 1; iy >= loop.iy0; --iy) samples.push_back(f.at(loop.ix0, iy));

    WindingResult res;
    res.min_abs = std::abs(samples.front());
    for (const cplx& v : samples) res.min_abs = std::min(res.min_abs, std::abs(v));
    if (res.min_abs < min_abs_floor) {
        res.status = WindingStatus::ZeroOnLoop;
        return res;
    }

    constexpr double kMaxStep = 3.0; // close to pi; larger steps are ambiguous
    double total = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const cplx a = samples[k];
        const cplx b = samples[(k + 1) % samples.size()];
        const double step = std::arg(b / a);
        res.max_phase_step = std::max(res.max_phase_step, std::abs(step));
        total += step;
    }
    if (res.max_phase_step >= kMaxStep) {
        res.status = WindingStatus::PhaseStepTooLarge;
        return res;
    }
    res.turns = total / (2.0 * M_PI);
    const double nearest = std::round(res.turns);
    if (std::abs(res.turns - nearest) > 0.25) {
        res.status = WindingStatus::NonInteger;
        return res;
    }
    res.index = static_cast<int>(nearest);
    return res;
}

RealField abs_field(const ComplexField& f) {
    RealField out(f.chart());
    parallel_for(f.size(), [&](std::size_t i) { out[i] = std::abs(f[i]); });
    return out;
}

ComplexField conj_field(const ComplexField& f) {
    ComplexField out(f.chart());
    parallel_for(f.size(), [&](std::size_t i) { out[i] = std::conj(f[i]); });
    return out;
}

RealField real_part(const ComplexField& f) {
    RealField out(f.chart());
    parallel_for(f.size(), [&](std::size_t i) { out[i] = f[i].real(); });
    return out;
}

RealField imag_part(const ComplexField& f) {
    RealField out(f.chart());
    parallel_for(f.size(), [&](std::size_t i) { out[i] = f[i].imag(); });
    return out;
}

} // namespace lagsurf
