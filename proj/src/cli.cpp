#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lagsurf/bonnet.hpp"
#include "lagsurf/catalog.hpp"
#include "lagsurf/extraction.hpp"
#include "lagsurf/integrability.hpp"
#include "lagsurf/io.hpp"
#include "lagsurf/reconstruction.hpp"

namespace lagsurf {

namespace {

struct CommonOpts {
    double tol = -1.0; // unset: defaults depend on tol-class
    std::string tol_class = "exact";
    std::string base = "";
    std::string report_path = "";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--tol", o.tol,
                    "tolerance (exact class) or the constant C in C*h^2 / C*h^4");
    cmd->add_option("--tol-class", o.tol_class, "exact | h2 | h4")
        ->check(CLI::IsMember({"exact", "h2", "h4"}));
    cmd->add_option("--report", o.report_path, "write the JSON report here");
}

double effective_tol(const CommonOpts& o, const ConformalChart& chart) {
    const double h = std::max(chart.hx(), chart.hy());
    if (o.tol_class == "h2") return (o.tol > 0 ? o.tol : 10.0) * h * h;
    if (o.tol_class == "h4") return (o.tol > 0 ? o.tol : 10.0) * h * h * h * h;
    return o.tol > 0 ? o.tol : 1e-8;
}

cplx parse_complex(const std::string& s) {
    std::istringstream in(s);
    double re = 0.0, im = 0.0;
    char comma = 0;
    if (!(in >> re)) throw InputError("cannot parse complex value: " + s);
    if (in >> comma) {
        if (comma != ',' || !(in >> im))
            throw InputError("complex values are written re,im: " + s);
    }
    return {re, im};
}

ConformalChart parse_chart_spec(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) parts.push_back(tok);
    if (parts.size() != 6 && parts.size() != 8)
        throw InputError("chart spec is nx,ny,x_min,x_max,y_min,y_max[,periodic_x,periodic_y]");
    ConformalChart c;
    c.nx = std::stoi(parts[0]);
    c.ny = std::stoi(parts[1]);
    c.x_min = std::stod(parts[2]);
    c.x_max = std::stod(parts[3]);
    c.y_min = std::stod(parts[4]);
    c.y_max = std::stod(parts[5]);
    if (parts.size() == 8) {
        c.periodic_x = std::stoi(parts[6]) != 0;
        c.periodic_y = std::stoi(parts[7]) != 0;
    }
    c.validate();
    return c;
}

GridPoint parse_base(const std::string& s, const ConformalChart& chart) {
    if (s.empty()) return GridPoint{0, 0};
    std::istringstream in(s);
    double x = 0.0, y = 0.0;
    char comma = 0;
    if (!(in >> x >> comma >> y) || comma != ',')
        throw InputError("--base is written x,y");
    const int ix = std::clamp(static_cast<int>(std::lround((x - chart.x_min) / chart.hx())), 0,
                              chart.nx - 1);
    const int iy = std::clamp(static_cast<int>(std::lround((y - chart.y_min) / chart.hy())), 0,
                              chart.ny - 1);
    return GridPoint{ix, iy};
}

void finish_report(Report& rep, const CommonOpts& o) {
    rep.exit_code = rep.all_pass() ? 0 : 1;
    std::cout << rep.to_json_text() << '\n';
    if (!o.report_path.empty()) write_report_file(rep, o.report_path);
}

int cmd_check(const std::string& input, const CommonOpts& o) {
    SurfaceData data = parse_surface_file(input);
    const double tol = effective_tol(o, data.chart);
    const IntegrabilityResiduals r = integrability_residuals(data);
    const ClassifyResult cls = classify(data, tol);

    Report rep;
    rep.command = "check";
    rep.input = input;
    rep.tolerance = tol;
    rep.add_norm("closedness", r.closedness_norms);
    rep.add_norm("gauss", r.gauss_norms);
    rep.add_norm("codazzi", r.codazzi_norms);
    rep.add_verdict("closedness", r.closedness_norms.linf <= tol);
    rep.add_verdict("gauss", r.gauss_norms.linf <= tol);
    rep.add_verdict("codazzi", r.codazzi_norms.linf <= tol);

    std::cout << "classification (tol " << tol << "):\n"
              << "  minimal:                " << (cls.minimal ? "yes" : "no") << "  (max|phi| = "
              << cls.minimal_residual << ")\n"
              << "  hamiltonian stationary: " << (cls.hamiltonian_stationary ? "yes" : "no")
              << "  (||phi_zbar|| = " << cls.hamiltonian_residual << ")\n"
              << "  conformal Maslov form:  " << (cls.conformal_maslov ? "yes" : "no")
              << "  (||(e^-u phi)_z|| = " << cls.conformal_maslov_residual
              << ", cross ||e^-2u psi_zbar|| = " << cls.psi_holomorphy_cross << ")\n";
    finish_report(rep, o);
    return rep.exit_code;
}

int cmd_reconstruct(const std::string& input, const CommonOpts& o, const std::string& out,
                    const std::string& base, bool project, bool override_gate) {
    SurfaceData data = parse_surface_file(input);
    const double tol = effective_tol(o, data.chart);
    ReconstructOptions ropts;
    ropts.tol = tol;
    ropts.override_integrability = override_gate;
    ropts.integrate.project_quadric = project;
    const GridPoint b = parse_base(base, data.chart);
    const ReconstructionResult res = reconstruct_grid(data, b, ropts);

    LoopRect loop{1, 1, data.chart.nx - 2, data.chart.ny - 2};
    const double mono = monodromy_defect(data, loop, ropts.integrate);

    Report rep;
    rep.command = "reconstruct";
    rep.input = input;
    rep.tolerance = tol;
    rep.add_norm("cross_defect", NormPair{res.cross_defect, 0.0});
    rep.add_norm("monodromy", NormPair{mono, 0.0});
    rep.add_norm("frame_drift", NormPair{res.drift.max(), 0.0});
    rep.add_norm("integrability", NormPair{res.integrability_linf, 0.0});
    const double ceiling = std::max(1e-4, 1e3 * tol);
    rep.add_verdict("cross_defect", res.cross_defect <= ceiling);
    rep.add_verdict("integrability", override_gate || res.integrability_linf <= tol);
    if (!out.empty()) write_immersion_csv(res.immersion, out);
    finish_report(rep, o);
    return rep.exit_code;
}

int cmd_deform(const std::string& input, const CommonOpts& o, double t0, const std::string& base,
               const std::string& out) {
    SurfaceData data = parse_surface_file(input);
    const double tol = effective_tol(o, data.chart);
    const double h = std::max(data.chart.hx(), data.chart.hy());
    const double admis_tol = (o.tol_class == "exact") ? 10.0 * h * h : tol;
    const GridPoint b = parse_base(base, data.chart);

    const DeformationState state = integrate_pfaff(data, t0, b, admis_tol);
    const SurfaceData deformed = deform(data, state);
    const IntegrabilityResiduals before = integrability_residuals(data);
    const IntegrabilityResiduals after = integrability_residuals(deformed);

    Report rep;
    rep.command = "deform";
    rep.input = input;
    rep.tolerance = tol;
    rep.add_norm("closure_defect", NormPair{state.closure_defect, 0.0});
    rep.add_norm("closedness_after", after.closedness_norms);
    rep.add_norm("gauss_after", after.gauss_norms);
    rep.add_norm("codazzi_after", after.codazzi_norms);
    rep.add_verdict("closure", state.closure_defect <= std::max(tol, 10.0 * h * h));
    rep.add_verdict("integrability_after",
                    after.max_linf() <= 2.0 * before.max_linf() + state.closure_defect + tol);
    if (!out.empty()) emit_surface_file(deformed, out);
    finish_report(rep, o);
    return rep.exit_code;
}

int cmd_pair(const std::string& input1, const std::string& input2, const CommonOpts& o) {
    SurfaceData a = parse_surface_file(input1);
    SurfaceData b = parse_surface_file(input2);
    require_same_chart(a.chart, b.chart, "pair");
    const double tol = effective_tol(o, a.chart);
    const double h = std::max(a.chart.hx(), a.chart.hy());
    const double holo_tol = (o.tol_class == "exact") ? 10.0 * h * h : tol;

    const PairDecomposition d = pair_decompose(a.psi, b.psi);

    Report rep;
    rep.command = "pair";
    rep.input = input1 + "," + input2;
    rep.tolerance = tol;
    rep.add_norm("h_cr", NormPair{d.h_cr_linf, 0.0});
    rep.add_norm("modulus_mismatch", NormPair{d.modulus_mismatch_linf, 0.0});
    rep.add_norm("alpha_imag", NormPair{d.alpha_imag_linf, 0.0});
    rep.add_verdict("h_holomorphic", d.h_cr_linf <= holo_tol);
    rep.add_verdict("moduli_match", d.modulus_mismatch_linf <= tol);
    rep.add_verdict("alpha_real", d.alpha_imag_linf <= tol);

    std::cout << "umbilic points (zeros of h): " << d.umbilics.points.size()
              << ", divisor degree " << d.umbilics.degree << '\n';
    for (const UmbilicPoint& p : d.umbilics.points)
        std::cout << "  cell (" << p.ix << "," << p.iy << ") index " << p.index << '\n';
    finish_report(rep, o);
    return rep.exit_code;
}

int cmd_umbilics(const std::string& input, const CommonOpts& o) {
    SurfaceData data = parse_surface_file(input);
    const double tol = effective_tol(o, data.chart);
    const UmbilicReport u = umbilic_analysis(data.psi);

    Report rep;
    rep.command = "umbilics";
    rep.input = input;
    rep.tolerance = tol;
    rep.add_norm("divisor_degree", NormPair{static_cast<double>(u.degree), 0.0});
    rep.add_verdict("all_indexed", u.boundary_clusters == 0);
    if (u.genus1_applicable) rep.add_verdict("genus1_consistent", u.genus1_consistent);

    std::cout << "umbilic points: " << u.points.size() << ", degree " << u.degree
              << ", unindexed boundary clusters " << u.boundary_clusters << '\n';
    for (const UmbilicPoint& p : u.points)
        std::cout << "  cell (" << p.ix << "," << p.iy << ") index " << p.index << " margin "
                  << p.margin << '\n';
    finish_report(rep, o);
    return rep.exit_code;
}

int cmd_bonnet(const std::string& input, const CommonOpts& o) {
    SurfaceData data = parse_surface_file(input);
    const double h = std::max(data.chart.hx(), data.chart.hy());
    const double tol =
        (o.tol_class == "exact" && o.tol <= 0) ? 10.0 * h * h : effective_tol(o, data.chart);
    const AdmissibilityBundle bundle = bonnet_admissibility(data);

    Report rep;
    rep.command = "bonnet";
    rep.input = input;
    rep.tolerance = tol;
    rep.add_norm("log_laplace", bundle.n_loglap);
    rep.add_norm("admissibility", bundle.n_admis);
    rep.add_norm("maslov_ratio", bundle.n_ratio);
    rep.add_norm("log_gauss", bundle.n_loggauss);
    rep.add_norm("arg_laplace", bundle.n_arglap);
    rep.add_norm("r_iso", bundle.n_iso);
    rep.add_norm("r_invpsi", bundle.n_invpsi);
    rep.add_verdict("bonnet_admissible", bundle.n_admis.linf <= tol);
    rep.add_verdict("isothermic", bundle.n_iso.linf <= tol);
    rep.add_verdict("inv_psi_harmonic", bundle.n_invpsi.linf <= tol);
    finish_report(rep, o);
    return rep.exit_code;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
    Report merged;
    merged.command = "report";
    int worst = 0;
    std::string joined;
    for (const std::string& path : inputs) {
        const Report r = parse_report_file(path);
        const std::string stem = std::filesystem::path(path).stem().string();
        if (!joined.empty()) joined += ",";
        joined += path;
        for (const auto& [name, n] : r.norms) merged.add_norm(stem + ":" + name, n);
        for (const auto& [name, v] : r.verdicts) merged.add_verdict(stem + ":" + name, v);
        worst = std::max(worst, r.exit_code);
    }
    merged.input = joined;
    merged.exit_code = std::max(worst, merged.all_pass() ? 0 : 1);
    std::cout << merged.to_json_text() << '\n';
    if (!out.empty()) write_report_file(merged, out);
    return merged.exit_code;
}

} // namespace

int run_command(const std::vector<std::string>& args) {
    CLI::App app{"Lagrangian surface data toolkit for complex space forms"};
    app.require_subcommand(1);
    int exit_code = 0;

    CommonOpts check_o;
    std::string check_in;
    auto* check = app.add_subcommand("check", "integrability residuals and classification");
    check->add_option("input", check_in, "surface data file")->required();
    add_common(check, check_o);
    check->callback([&]() { exit_code = cmd_check(check_in, check_o); });

    CommonOpts rec_o;
    std::string rec_in, rec_out, rec_base;
    bool rec_project = false, rec_override = false;
    auto* rec = app.add_subcommand("reconstruct", "frame integration to an immersion (CSV export)");
    rec->add_option("input", rec_in, "surface data file")->required();
    rec->add_option("--out", rec_out, "immersion CSV path");
    rec->add_option("--base", rec_base, "base point x,y (default chart corner)");
    rec->add_flag("--project", rec_project, "renormalize the quadric constraint each step");
    rec->add_flag("--override-integrability", rec_override, "integrate even if the gate fails");
    add_common(rec, rec_o);
    rec->callback([&]() {
        exit_code = cmd_reconstruct(rec_in, rec_o, rec_out, rec_base, rec_project, rec_override);
    });

    CommonOpts def_o;
    std::string def_in, def_out, def_base;
    double def_t0 = 0.0;
    auto* def = app.add_subcommand("deform", "Bonnet deformation: Pfaff system + psi -> e^{it} psi");
    def->add_option("input", def_in, "surface data file")->required();
    def->add_option("--t0", def_t0, "deformation parameter at the base point")->required();
    def->add_option("--base", def_base, "base point x,y");
    def->add_option("--out", def_out, "write the deformed surface data here");
    add_common(def, def_o);
    def->callback([&]() { exit_code = cmd_deform(def_in, def_o, def_t0, def_base, def_out); });

    CommonOpts pair_o;
    std::string pair_in1, pair_in2;
    auto* pairc = app.add_subcommand("pair", "decompose the psi fields of two surface files");
    pairc->add_option("input1", pair_in1, "first surface data file")->required();
    pairc->add_option("input2", pair_in2, "second surface data file")->required();
    add_common(pairc, pair_o);
    pairc->callback([&]() { exit_code = cmd_pair(pair_in1, pair_in2, pair_o); });

    CommonOpts umb_o;
    std::string umb_in;
    auto* umb = app.add_subcommand("umbilics", "zeros of psi with winding indices");
    umb->add_option("input", umb_in, "surface data file")->required();
    add_common(umb, umb_o);
    umb->callback([&]() { exit_code = cmd_umbilics(umb_in, umb_o); });

    CommonOpts bon_o;
    std::string bon_in;
    auto* bon = app.add_subcommand("bonnet", "Bonnet-deformation admissibility residual bundle");
    bon->add_option("input", bon_in, "surface data file")->required();
    add_common(bon, bon_o);
    bon->callback([&]() { exit_code = cmd_bonnet(bon_in, bon_o); });

    auto* cat = app.add_subcommand("catalog", "emit generator output");
    cat->require_subcommand(1);

    std::string cc_chart, cc_out;
    int cc_c = 0;
    double cc_u0 = 0.0;
    std::string cc_phi0 = "0", cc_psi0 = "0";
    auto* catc = cat->add_subcommand("constant", "constant solution");
    catc->add_option("--c", cc_c, "space form constant")->required();
    catc->add_option("--u0", cc_u0, "constant u");
    catc->add_option("--phi0", cc_phi0, "constant phi, re,im");
    catc->add_option("--psi0", cc_psi0, "constant psi, re,im");
    catc->add_option("--chart", cc_chart, "nx,ny,x_min,x_max,y_min,y_max[,px,py]")->required();
    catc->add_option("--out", cc_out, "output surface data file")->required();
    catc->callback([&]() {
        const SurfaceData d = make_constant_solution(parse_chart_spec(cc_chart), cc_c, cc_u0,
                                                     parse_complex(cc_phi0), parse_complex(cc_psi0));
        emit_surface_file(d, cc_out);
        exit_code = 0;
    });

    std::string cp_chart, cp_out, cp_psi0 = "1";
    int cp_c = 1;
    double cp_uinit = 0.0, cp_duinit = 0.0;
    auto* catp = cat->add_subcommand("profile", "1-D profile solution of the Gauss equation");
    catp->add_option("--c", cp_c, "space form constant")->required();
    catp->add_option("--psi0", cp_psi0, "constant psi, re,im");
    catp->add_option("--u-init", cp_uinit, "u at the left edge");
    catp->add_option("--du-init", cp_duinit, "u' at the left edge");
    catp->add_option("--chart", cp_chart, "chart spec")->required();
    catp->add_option("--out", cp_out, "output surface data file")->required();
    catp->callback([&]() {
        const SurfaceData d = solve_profile_ode(parse_chart_spec(cp_chart), cp_c,
                                                parse_complex(cp_psi0), cp_uinit, cp_duinit);
        emit_surface_file(d, cp_out);
        exit_code = 0;
    });

    std::string pe_in, pe_out, pe_field = "u", pe_center = "0,0", pe_dir = "1";
    double pe_eps = 0.0, pe_width = 0.25;
    auto* catpe = cat->add_subcommand("perturb", "add a smooth bump to one field");
    catpe->add_option("--in", pe_in, "input surface data file")->required();
    catpe->add_option("--field", pe_field, "u | phi | psi")
        ->check(CLI::IsMember({"u", "phi", "psi"}));
    catpe->add_option("--eps", pe_eps, "amplitude")->required();
    catpe->add_option("--center", pe_center, "bump center x,y");
    catpe->add_option("--width", pe_width, "bump width");
    catpe->add_option("--dir", pe_dir, "complex direction re,im");
    catpe->add_option("--out", pe_out, "output surface data file")->required();
    catpe->callback([&]() {
        const SurfaceData base = parse_surface_file(pe_in);
        const cplx center = parse_complex(pe_center);
        BumpSpec bump{center.real(), center.imag(), pe_width, parse_complex(pe_dir)};
        const DataFieldId id = pe_field == "u"     ? DataFieldId::U
                               : pe_field == "phi" ? DataFieldId::Phi
                                                   : DataFieldId::Psi;
        const PerturbResult r = perturb(base, id, pe_eps, bump);
        emit_surface_file(r.data, pe_out);
        exit_code = 0;
    });

    std::vector<std::string> rp_inputs;
    std::string rp_out;
    auto* rp = app.add_subcommand("report", "merge JSON reports");
    rp->add_option("inputs", rp_inputs, "report files")->required()->expected(-1);
    rp->add_option("--out", rp_out, "merged report path");
    rp->callback([&]() { exit_code = cmd_report(rp_inputs, rp_out); });

    std::vector<std::string> argv_store;
    argv_store.push_back("lagsurf");
    for (const std::string& a : args) argv_store.push_back(a);
    std::vector<char*> argv;
    for (std::string& s : argv_store) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const VerdictError& e) {
        std::cerr << "verdict failure: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return exit_code;
}

} // namespace lagsurf
