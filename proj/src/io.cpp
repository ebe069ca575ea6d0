#include "lagsurf/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lagsurf/exec.hpp"

namespace lagsurf {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError(InputError::Code::UnreadableFile, "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        throw InputError(InputError::Code::UnreadableFile, "read failure on file: " + path);
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError(InputError::Code::UnreadableFile, "cannot open file for writing: " + path);
    out << text;
    if (!out)
        throw InputError(InputError::Code::UnreadableFile, "write failure on file: " + path);
}

std::vector<double> parse_array(const nlohmann::json& j, const char* name, std::size_t expected) {
    if (!j.contains(name))
        throw InputError(InputError::Code::MalformedDocument,
                         std::string("missing field: ") + name);
    const auto& arr = j.at(name);
    if (!arr.is_array())
        throw InputError(InputError::Code::MalformedDocument,
                         std::string("field is not an array: ") + name);
    if (arr.size() != expected) {
        std::ostringstream msg;
        msg << "length mismatch in field " << name << ": expected " << expected << ", got "
            << arr.size();
        throw InputError(InputError::Code::LengthMismatch, msg.str());
    }
    std::vector<double> out(expected);
    for (std::size_t i = 0; i < expected; ++i) {
        if (!arr[i].is_number())
            throw InputError(InputError::Code::NonFinite,
                             std::string("non-numeric entry in field ") + name);
        out[i] = arr[i].get<double>();
        if (!std::isfinite(out[i]))
            throw InputError(InputError::Code::NonFinite,
                             std::string("non-finite entry in field ") + name);
    }
    return out;
}

} // namespace

SurfaceData parse_surface_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(InputError::Code::MalformedDocument,
                         std::string("malformed surface document: ") + e.what());
    }
    if (!j.is_object() || !j.contains("chart") || !j.contains("c"))
        throw InputError(InputError::Code::MalformedDocument,
                         "malformed surface document: missing chart or c");
    if (j.contains("version") && j.at("version").is_number_integer() &&
        j.at("version").get<int>() != 1)
        throw InputError(InputError::Code::MalformedDocument, "unsupported document version");

    if (!j.at("c").is_number_integer())
        throw InputError(InputError::Code::InvalidC, "c must be an integer");
    const int c = j.at("c").get<int>();
    if (c != -1 && c != 0 && c != 1)
        throw InputError(InputError::Code::InvalidC,
                         "invalid space form constant c = " + std::to_string(c));

    const auto& jc = j.at("chart");
    ConformalChart chart;
    try {
        chart.nx = jc.at("nx").get<int>();
        chart.ny = jc.at("ny").get<int>();
        chart.x_min = jc.at("x_min").get<double>();
        chart.x_max = jc.at("x_max").get<double>();
        chart.y_min = jc.at("y_min").get<double>();
        chart.y_max = jc.at("y_max").get<double>();
        chart.periodic_x = jc.value("periodic_x", false);
        chart.periodic_y = jc.value("periodic_y", false);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(InputError::Code::MalformedDocument,
                         std::string("malformed chart object: ") + e.what());
    }
    chart.validate();

    const std::size_t n = chart.size();
    const auto uv = parse_array(j, "u", n);
    const auto phre = parse_array(j, "phi_re", n);
    const auto phim = parse_array(j, "phi_im", n);
    const auto psre = parse_array(j, "psi_re", n);
    const auto psim = parse_array(j, "psi_im", n);

    RealField u(chart);
    ComplexField phi(chart), psi(chart);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = uv[i];
        phi[i] = cplx(phre[i], phim[i]);
        psi[i] = cplx(psre[i], psim[i]);
    }
    return SurfaceData(chart, SpaceForm(c), std::move(u), std::move(phi), std::move(psi));
}

SurfaceData parse_surface_file(const std::string& path) {
    return parse_surface_text(read_file(path));
}

std::string emit_surface_text(const SurfaceData& data) {
    ordered_json j;
    j["version"] = 1;
    j["c"] = data.c();
    ordered_json jc;
    jc["nx"] = data.chart.nx;
    jc["ny"] = data.chart.ny;
    jc["x_min"] = data.chart.x_min;
    jc["x_max"] = data.chart.x_max;
    jc["y_min"] = data.chart.y_min;
    jc["y_max"] = data.chart.y_max;
    jc["periodic_x"] = data.chart.periodic_x;
    jc["periodic_y"] = data.chart.periodic_y;
    j["chart"] = std::move(jc);
    const std::size_t n = data.chart.size();
    std::vector<double> uv(n), phre(n), phim(n), psre(n), psim(n);
    for (std::size_t i = 0; i < n; ++i) {
        uv[i] = data.u[i];
        phre[i] = data.phi[i].real();
        phim[i] = data.phi[i].imag();
        psre[i] = data.psi[i].real();
        psim[i] = data.psi[i].imag();
    }
    j["u"] = uv;
    j["phi_re"] = phre;
    j["phi_im"] = phim;
    j["psi_re"] = psre;
    j["psi_im"] = psim;
    return j.dump(1);
}

void emit_surface_file(const SurfaceData& data, const std::string& path) {
    write_file(path, emit_surface_text(data));
}

void write_immersion_csv(const Immersion& imm, const std::string& path) {
    std::ostringstream out;
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << ',' << buf;
    };
    if (imm.c == 0) {
        out << "x,y,f1_re,f1_im,f2_re,f2_im\n";
        for (int iy = 0; iy < imm.chart.ny; ++iy) {
            for (int ix = 0; ix < imm.chart.nx; ++ix) {
                std::snprintf(buf, sizeof(buf), "%.17g", imm.chart.x(ix));
                out << buf;
                put(imm.chart.y(iy));
                const auto& p = imm.points[imm.chart.idx(ix, iy)];
                // R^4 ~ C^2 packing: f1 = (p0, p1), f2 = (p2, p3).
                for (int k = 0; k < 4; ++k) put(p[k]);
                out << '\n';
            }
        }
    } else {
        out << "x,y,F0_re,F0_im,F1_re,F1_im,F2_re,F2_im,p0_re,p0_im,p1_re,p1_im,p2_re,p2_im\n";
        for (int iy = 0; iy < imm.chart.ny; ++iy) {
            for (int ix = 0; ix < imm.chart.nx; ++ix) {
                std::snprintf(buf, sizeof(buf), "%.17g", imm.chart.x(ix));
                out << buf;
                put(imm.chart.y(iy));
                const std::size_t i = imm.chart.idx(ix, iy);
                for (int k = 0; k < 3; ++k) {
                    put(imm.lift[i][k].real());
                    put(imm.lift[i][k].imag());
                }
                for (int k = 0; k < 3; ++k) {
                    put(imm.projective[i][k].real());
                    put(imm.projective[i][k].imag());
                }
                out << '\n';
            }
        }
    }
    write_file(path, out.str());
}

bool Report::all_pass() const {
    for (const auto& [name, ok] : verdicts)
        if (!ok) return false;
    return true;
}

std::string Report::to_json_text() const {
    ordered_json j;
    j["command"] = command;
    j["input"] = input;
    j["tolerance"] = tolerance;
    ordered_json jn = ordered_json::object();
    for (const auto& [name, n] : norms) {
        ordered_json e;
        e["linf"] = n.linf;
        e["l2"] = n.l2;
        jn[name] = std::move(e);
    }
    j["norms"] = std::move(jn);
    ordered_json jv = ordered_json::object();
    for (const auto& [name, v] : verdicts) jv[name] = v;
    j["verdicts"] = std::move(jv);
    j["exit"] = exit_code;
    return j.dump(1);
}

Report parse_report_file(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(InputError::Code::MalformedDocument,
                         std::string("malformed report: ") + e.what());
    }
    Report r;
    try {
        r.command = j.at("command").get<std::string>();
        r.input = j.value("input", std::string());
        r.tolerance = j.value("tolerance", 0.0);
        if (j.contains("norms")) {
            for (const auto& [name, e] : j.at("norms").items())
                r.add_norm(name, NormPair{e.value("linf", 0.0), e.value("l2", 0.0)});
        }
        if (j.contains("verdicts")) {
            for (const auto& [name, v] : j.at("verdicts").items())
                r.add_verdict(name, v.get<bool>());
        }
        r.exit_code = j.value("exit", 0);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(InputError::Code::MalformedDocument,
                         std::string("malformed report: ") + e.what());
    }
    return r;
}

void write_report_file(const Report& report, const std::string& path) {
    write_file(path, report.to_json_text());
}

} // namespace lagsurf
