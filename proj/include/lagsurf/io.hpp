#pragma once

#include <string>
#include <vector>

#include "lagsurf/reconstruction.hpp"
#include "lagsurf/surface_data.hpp"

namespace lagsurf {

// Surface data document (JSON, version 1):
// { "version": 1, "c": -1|0|1,
//   "chart": { "nx", "ny", "x_min", "x_max", "y_min", "y_max",
//              "periodic_x", "periodic_y" },
//   "u": [nx*ny reals, row-major, index iy*nx+ix],
//   "phi_re": [...], "phi_im": [...], "psi_re": [...], "psi_im": [...] }
SurfaceData parse_surface_file(const std::string& path);
SurfaceData parse_surface_text(const std::string& text);
std::string emit_surface_text(const SurfaceData& data);
void emit_surface_file(const SurfaceData& data, const std::string& path);

// Immersion CSV: header row, 17 significant digits.
//   c = 0:   x,y,f1_re,f1_im,f2_re,f2_im
//   c = +-1: x,y,F0_re,...,F2_im,p0_re,...,p2_im
void write_immersion_csv(const Immersion& imm, const std::string& path);

// Machine-readable report; serialization is deterministic (fixed key order,
// no timestamps), so identical inputs give byte-identical reports.
struct Report {
    std::string command;
    std::string input;
    double tolerance = 0.0;
    std::vector<std::pair<std::string, NormPair>> norms;
    std::vector<std::pair<std::string, bool>> verdicts;
    int exit_code = 0;

    void add_norm(const std::string& name, const NormPair& n) { norms.emplace_back(name, n); }
    void add_verdict(const std::string& name, bool v) { verdicts.emplace_back(name, v); }
    bool all_pass() const;
    std::string to_json_text() const;
};

Report parse_report_file(const std::string& path);
void write_report_file(const Report& report, const std::string& path);

// CLI entry point (subcommands: check, reconstruct, deform, pair, umbilics,
// bonnet, catalog, report). Exit 0 = verdicts pass, 1 = verdict failure,
// 2 = input error.
int run_command(const std::vector<std::string>& args);

} // namespace lagsurf
