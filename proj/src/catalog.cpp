#include "lagsurf/catalog.hpp"

#include <cmath>
#include <sstream>

#include "lagsurf/exec.hpp"

namespace lagsurf {

SurfaceData make_constant_solution(const ConformalChart& chart, int c, double u0,
                                   cplx phi0, cplx psi0) {
    chart.validate();
    SpaceForm form(c);
    const double residual = std::norm(phi0) + c * std::exp(u0) - std::exp(-2.0 * u0) * std::norm(psi0);
    if (std::abs(residual) > 1e-12) {
        std::ostringstream msg;
        msg << "constant solution violates the Gauss constraint: |phi0|^2 + c e^{u0} - e^{-2u0}|psi0|^2 = "
            << residual;
        throw InputError(InputError::Code::ConstraintViolated, msg.str());
    }
    RealField u(chart, u0);
    ComplexField phi(chart, phi0);
    ComplexField psi(chart, psi0);
    return SurfaceData(chart, form, std::move(u), std::move(phi), std::move(psi));
}

namespace {

// u'' = -4 c e^u + 4 e^{-2u} P, P = |psi0|^2.
inline double profile_rhs(double u, double c, double P) {
    return -4.0 * c * std::exp(u) + 4.0 * P * std::exp(-2.0 * u);
}

constexpr double kProfileCap = 20.0;

} // namespace

SurfaceData solve_profile_ode(const ConformalChart& chart, int c, cplx psi0,
                              double u_init, double du_init) {
    chart.validate();
    SpaceForm form(c);
    const double P = std::norm(psi0);

    if (c == -1) {
        throw InputError(InputError::Code::SignObstruction,
                         "c = -1 with phi = 0 admits no bounded profile: the Gauss equation forces "
                         "u_{z zbar} = e^u + e^{-2u}|psi0|^2 > 0 everywhere");
    }
    if (c == 0 && P != 0.0) {
        throw InputError(InputError::Code::SignObstruction,
                         "c = 0 with phi = 0 requires psi0 = 0 (no bounded minimal profile)");
    }
    if (std::abs(u_init) > kProfileCap) {
        throw InputError(InputError::Code::Blowup, "profile initial value exceeds the |u| cap");
    }

    RealField u(chart);
    if (c == 1) {
        // Equilibrium e^{u*} = |psi0|^{2/3}; emit the exact constant when the
        // initial data sits on it, so the most-used fixture carries no drift.
        const double ustar = std::log(P) / 3.0;
        if (P > 0.0 && std::abs(u_init - ustar) < 1e-12 && std::abs(du_init) < 1e-12) {
            for (std::size_t i = 0; i < u.size(); ++i) u[i] = ustar;
            return SurfaceData(chart, form, std::move(u),
                               ComplexField(chart, 0.0), ComplexField(chart, psi0));
        }
        if (P == 0.0) {
            throw InputError(InputError::Code::SignObstruction,
                             "c = +1 with psi0 = 0 has no bounded profile (u'' = -4 e^u)");
        }
    }

    // March the 1-D profile and broadcast along y.
    std::vector<double> uline(chart.nx);
    double uu = u_init, du = du_init;
    const double h = chart.hx();
    const double cc = c;
    for (int ix = 0; ix < chart.nx; ++ix) {
        uline[ix] = uu;
        if (std::abs(uu) > kProfileCap) {
            std::ostringstream msg;
            msg << "profile escaped |u| cap at x = " << chart.x(ix);
            throw InputError(InputError::Code::Blowup, msg.str());
        }
        if (ix == chart.nx - 1) break;
        const double k1u = du, k1v = profile_rhs(uu, cc, P);
        const double k2u = du + 0.5 * h * k1v, k2v = profile_rhs(uu + 0.5 * h * k1u, cc, P);
        const double k3u = du + 0.5 * h * k2v, k3v = profile_rhs(uu + 0.5 * h * k2u, cc, P);
        const double k4u = du + h * k3v, k4v = profile_rhs(uu + h * k3u, cc, P);
        uu += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        du += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }

    parallel_for(static_cast<std::size_t>(chart.ny), [&](std::size_t row) {
        for (int ix = 0; ix < chart.nx; ++ix) u.at(ix, static_cast<int>(row)) = uline[ix];
    });
    return SurfaceData(chart, form, std::move(u), ComplexField(chart, 0.0),
                       ComplexField(chart, psi0));
}

PerturbResult perturb(const SurfaceData& data, DataFieldId which, double eps,
                      const BumpSpec& bump) {
    const ConformalChart& chart = data.chart;
    RealField bump_field(chart);
    parallel_for(chart.size(), [&](std::size_t i) {
        const int ix = static_cast<int>(i) % chart.nx;
        const int iy = static_cast<int>(i) / chart.nx;
        const double dx = chart.x(ix) - bump.cx;
        const double dy = chart.y(iy) - bump.cy;
        bump_field[i] = std::exp(-(dx * dx + dy * dy) / (bump.width * bump.width));
    });

    RealField u = data.u;
    ComplexField phi = data.phi;
    ComplexField psi = data.psi;
    RealField d_gauss(chart);
    ComplexField d_codazzi(chart);
    ComplexField d_closed(chart);
    const double c = data.c();

    switch (which) {
    case DataFieldId::U: {
        const double amp = eps * bump.direction.real();
        ComplexField b_zz = second_zzbar(bump_field);
        ComplexField emub(chart); // derivative of (e^{-u} phi) in u-direction: -phi e^{-u} b
        parallel_for(chart.size(), [&](std::size_t i) {
            u[i] += amp * bump_field[i];
            const double eu = std::exp(data.u[i]);
            const double em2u = std::exp(-2.0 * data.u[i]);
            d_gauss[i] = amp * (b_zz[i].real() + c * eu * bump_field[i] +
                                2.0 * em2u * std::norm(data.psi[i]) * bump_field[i]);
            emub[i] = -amp * bump_field[i] * std::exp(-data.u[i]) * data.phi[i];
        });
        // codazzi: d/deps [ e^{-2u} psi_zbar - (e^{-u} phi)_z ]
        ComplexField psi_zbar = derivative(data.psi, Wirtinger::Dzbar);
        ComplexField demu_z = derivative(emub, Wirtinger::Dz);
        parallel_for(chart.size(), [&](std::size_t i) {
            const double em2u = std::exp(-2.0 * data.u[i]);
            d_codazzi[i] = -2.0 * amp * bump_field[i] * em2u * psi_zbar[i] - demu_z[i];
        });
        break;
    }
    case DataFieldId::Phi: {
        ComplexField dphi(chart);
        parallel_for(chart.size(), [&](std::size_t i) {
            dphi[i] = eps * bump.direction * bump_field[i];
            phi[i] += dphi[i];
        });
        ComplexField dphi_zbar = derivative(dphi, Wirtinger::Dzbar);
        ComplexField dphibar_z = derivative(conj_field(dphi), Wirtinger::Dz);
        ComplexField emu_dphi(chart);
        parallel_for(chart.size(), [&](std::size_t i) {
            emu_dphi[i] = std::exp(-data.u[i]) * dphi[i];
        });
        ComplexField demu_z = derivative(emu_dphi, Wirtinger::Dz);
        parallel_for(chart.size(), [&](std::size_t i) {
            d_closed[i] = dphi_zbar[i] - dphibar_z[i];
            d_gauss[i] = 2.0 * (std::conj(data.phi[i]) * dphi[i]).real();
            d_codazzi[i] = -demu_z[i];
        });
        break;
    }
    case DataFieldId::Psi: {
        ComplexField dpsi(chart);
        parallel_for(chart.size(), [&](std::size_t i) {
            dpsi[i] = eps * bump.direction * bump_field[i];
            psi[i] += dpsi[i];
        });
        ComplexField dpsi_zbar = derivative(dpsi, Wirtinger::Dzbar);
        parallel_for(chart.size(), [&](std::size_t i) {
            const double em2u = std::exp(-2.0 * data.u[i]);
            d_gauss[i] = -em2u * 2.0 * (std::conj(data.psi[i]) * dpsi[i]).real();
            d_codazzi[i] = em2u * dpsi_zbar[i];
        });
        break;
    }
    }

    return PerturbResult{SurfaceData(chart, data.form, std::move(u), std::move(phi), std::move(psi)),
                         std::move(d_gauss), std::move(d_codazzi), std::move(d_closed)};
}

} // namespace lagsurf
