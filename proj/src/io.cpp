#include "epm/io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace epm {

std::string format_fixed(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12e", v + 0.0);  // no "-0"
    return buf;
}

namespace {

Json pair(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex unpair(const Json& j) {
    if (!j.is_array() || j.size() != 2) fail(ErrorKind::usage, "expected a [re, im] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

Json rows_json(const CMatrix& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(pair(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

CMatrix rows_from_json(const Json& j) {
    const auto n = static_cast<Eigen::Index>(j.size());
    CMatrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        if (static_cast<Eigen::Index>(j[r].size()) != n) fail(ErrorKind::usage, "matrix JSON is not square");
        for (Eigen::Index c = 0; c < n; ++c) m(r, c) = unpair(j[r][c]);
    }
    return m;
}

const char* severity_name(Severity s) { return s == Severity::error ? "error" : "warning"; }

}  // namespace

Json to_json(const ValidationReport& rep) {
    Json j;
    j["ok"] = rep.ok;
    j["min_decoherence_eigenvalue"] = rep.min_decoherence_eigenvalue;
    j["findings"] = Json::array();
    for (const auto& f : rep.findings)
        j["findings"].push_back({{"severity", severity_name(f.severity)}, {"code", f.code}, {"message", f.message}});
    return j;
}

Json to_json(const EvolutionMatrix& m) {
    Json j;
    j["n_modes"] = m.n_modes;
    j["kind"] = m.basis.kind == BasisKind::reduced ? "reduced" : "full";
    j["basis"] = m.basis.labels();
    Json flat = Json::array();
    for (Eigen::Index r = 0; r < m.matrix.rows(); ++r)
        for (Eigen::Index c = 0; c < m.matrix.cols(); ++c) flat.push_back(pair(m.matrix(r, c)));
    j["matrix"] = std::move(flat);
    return j;
}

EvolutionMatrix evolution_from_json(const Json& j) {
    EvolutionMatrix m;
    for (const auto& label : j.at("basis")) m.basis.entries.push_back(MomentIndex::parse(label.get<std::string>()));
    m.basis.kind = j.value("kind", "full") == "reduced" ? BasisKind::reduced : BasisKind::full;
    const auto n = static_cast<Eigen::Index>(m.basis.size());
    const auto& flat = j.at("matrix");
    if (static_cast<Eigen::Index>(flat.size()) != n * n)
        fail(ErrorKind::usage, "evolution matrix JSON: matrix size does not match the basis");
    m.matrix.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) m.matrix(r, c) = unpair(flat[r * n + c]);
    int modes = 0;
    for (const auto& e : m.basis.entries) modes = std::max(modes, e.max_mode());
    m.n_modes = j.value("n_modes", modes);
    return m;
}

Json to_json(const EPReport& rep) {
    Json j;
    j["clusters"] = Json::array();
    for (std::size_t i = 0; i < rep.clusters.size(); ++i) {
        const auto& c = rep.clusters[i];
        Json members = Json::array();
        for (auto v : c.members) members.push_back(pair(v));
        j["clusters"].push_back({{"value", pair(c.value)},
                                 {"alg", c.algebraic_multiplicity},
                                 {"geo", c.geometric_multiplicity},
                                 {"blocks", rep.jordan[i].block_sizes},
                                 {"ep_order", rep.jordan[i].order},
                                 {"rank_sequence", rep.jordan[i].rank_sequence},
                                 {"members", members}});
    }
    j["tolerances"] = {{"cluster", rep.tol_cluster}, {"rank", rep.tol_rank}};
    return j;
}

EPReport ep_report_from_json(const Json& j) {
    EPReport rep;
    for (const auto& c : j.at("clusters")) {
        EigenCluster cl;
        cl.value = unpair(c.at("value"));
        cl.algebraic_multiplicity = c.at("alg").get<int>();
        cl.geometric_multiplicity = c.at("geo").get<int>();
        if (c.contains("members"))
            for (const auto& v : c["members"]) cl.members.push_back(unpair(v));
        JordanStructure js;
        js.block_sizes = c.at("blocks").get<std::vector<int>>();
        js.order = c.at("ep_order").get<int>();
        js.rank_sequence = c.value("rank_sequence", std::vector<int>{});
        rep.clusters.push_back(std::move(cl));
        rep.jordan.push_back(std::move(js));
    }
    rep.tol_cluster = j.at("tolerances").at("cluster").get<double>();
    rep.tol_rank = j.at("tolerances").at("rank").get<double>();
    return rep;
}

Json to_json(const LatticeModel& lat) {
    Json j;
    j["n_modes"] = lat.n_modes;
    j["h"] = rows_json(lat.nhh_h);
    j["hermitian_h"] = rows_json(lat.hermitian_h);
    j["gamma"] = rows_json(lat.jump_gamma);
    j["psd"] = lat.psd;
    j["min_gamma_eigenvalue"] = lat.min_gamma_eigenvalue;
    j["required_extra_damping"] = lat.required_extra_damping;
    Json adj = Json::array();
    for (int a = 0; a < lat.n_modes; ++a) {
        Json neighbors = Json::array();
        for (int b = 0; b < lat.n_modes; ++b) {
            if (a == b) continue;
            if (lat.hermitian_h(a, b) == Complex{} && lat.jump_gamma(a, b) == Complex{}) continue;
            neighbors.push_back({{"neighbor", b + 1},
                                 {"coherent", pair(lat.hermitian_h(a, b))},
                                 {"dissipative", pair(lat.jump_gamma(a, b))}});
        }
        adj.push_back({{"mode", a + 1},
                       {"detuning", lat.hermitian_h(a, a).real()},
                       {"damping", lat.jump_gamma(a, a).real()},
                       {"neighbors", std::move(neighbors)}});
    }
    j["adjacency"] = std::move(adj);
    return j;
}

LatticeModel lattice_from_json(const Json& j) {
    LatticeModel lat;
    lat.n_modes = j.at("n_modes").get<int>();
    lat.nhh_h = rows_from_json(j.at("h"));
    lat.hermitian_h = j.contains("hermitian_h") ? rows_from_json(j["hermitian_h"])
                                                : CMatrix(0.5 * (lat.nhh_h + lat.nhh_h.adjoint()));
    lat.jump_gamma = rows_from_json(j.at("gamma"));
    lat.psd = j.at("psd").get<bool>();
    lat.min_gamma_eigenvalue = j.at("min_gamma_eigenvalue").get<double>();
    lat.required_extra_damping = j.value("required_extra_damping", 0.0);
    if (lat.nhh_h.rows() != lat.n_modes || lat.jump_gamma.rows() != lat.n_modes)
        fail(ErrorKind::usage, "lattice JSON: matrix size does not match n_modes");
    return lat;
}

std::string lattice_summary(const LatticeModel& lat) {
    std::ostringstream out;
    out << "lattice of " << lat.n_modes << " modes, jump matrix "
        << (lat.psd ? "positive semidefinite" : "NOT positive semidefinite")
        << " (min eigenvalue " << format_fixed(lat.min_gamma_eigenvalue) << ")\n";
    if (!lat.psd) out << "extra uniform damping needed: " << format_fixed(lat.required_extra_damping) << "\n";
    for (int a = 0; a < lat.n_modes; ++a) {
        out << "mode " << a + 1 << ": detuning " << format_fixed(lat.hermitian_h(a, a).real()) << ", damping "
            << format_fixed(lat.jump_gamma(a, a).real()) << "\n";
        for (int b = 0; b < lat.n_modes; ++b) {
            if (a == b || (lat.hermitian_h(a, b) == Complex{} && lat.jump_gamma(a, b) == Complex{})) continue;
            out << "  -> " << b + 1 << "  coherent " << format_complex(lat.hermitian_h(a, b)) << "  dissipative "
                << format_complex(lat.jump_gamma(a, b)) << "\n";
        }
    }
    return out.str();
}

std::string lattice_graphml(const LatticeModel& lat) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        << "  <key id=\"detuning\" for=\"node\" attr.name=\"detuning\" attr.type=\"double\"/>\n"
        << "  <key id=\"damping\" for=\"node\" attr.name=\"damping\" attr.type=\"double\"/>\n"
        << "  <key id=\"coherent\" for=\"edge\" attr.name=\"coherent\" attr.type=\"string\"/>\n"
        << "  <key id=\"dissipative\" for=\"edge\" attr.name=\"dissipative\" attr.type=\"string\"/>\n"
        << "  <graph id=\"lattice\" edgedefault=\"undirected\">\n";
    for (int a = 0; a < lat.n_modes; ++a)
        out << "    <node id=\"b" << a + 1 << "\"><data key=\"detuning\">" << format_fixed(lat.hermitian_h(a, a).real())
            << "</data><data key=\"damping\">" << format_fixed(lat.jump_gamma(a, a).real()) << "</data></node>\n";
    for (int a = 0; a < lat.n_modes; ++a)
        for (int b = a + 1; b < lat.n_modes; ++b) {
            if (lat.hermitian_h(a, b) == Complex{} && lat.jump_gamma(a, b) == Complex{}) continue;
            out << "    <edge source=\"b" << a + 1 << "\" target=\"b" << b + 1 << "\"><data key=\"coherent\">"
                << format_complex(lat.hermitian_h(a, b)) << "</data><data key=\"dissipative\">"
                << format_complex(lat.jump_gamma(a, b)) << "</data></edge>\n";
        }
    out << "  </graph>\n</graphml>\n";
    return out.str();
}

Json to_json(const VerificationReport& rep) {
    Json j;
    Json per = Json::array();
    for (std::size_t i = 0; i < rep.labels.size(); ++i)
        per.push_back({{"moment", rep.labels[i]}, {"max_dev", rep.per_moment_max_dev[i]}});
    j["per_moment_max_dev"] = std::move(per);
    j["max_dev"] = rep.max_dev;
    j["tol"] = rep.tol;
    j["pass"] = rep.pass;
    return j;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double_cell(const std::string& s) {
    if (s == "nan") return std::nan("");
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        fail(ErrorKind::usage, "CSV: bad number '" + s + "'");
    }
    if (used != s.size()) fail(ErrorKind::usage, "CSV: bad number '" + s + "'");
    return v;
}

std::vector<std::string> lines_of(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream is{std::string(text)};
    for (std::string l; std::getline(is, l);) {
        if (!l.empty() && l.back() == '\r') l.pop_back();
        if (!l.empty()) out.push_back(l);
    }
    return out;
}

}  // namespace

std::string sweep_csv(const SweepTable& table) {
    std::size_t width = 0;
    for (const auto& r : table.rows) width = std::max(width, r.eigenvalues.size());
    std::ostringstream out;
    out << "param";
    for (std::size_t k = 1; k <= width; ++k) out << ",re_" << k << ",im_" << k;
    out << "\n";
    for (const auto& r : table.rows) {
        out << format_fixed(r.param);
        for (std::size_t k = 0; k < width; ++k) {
            if (k < r.eigenvalues.size())
                out << ',' << format_fixed(r.eigenvalues[k].real()) << ',' << format_fixed(r.eigenvalues[k].imag());
            else
                out << ",nan,nan";
        }
        out << "\n";
    }
    return out.str();
}

SweepTable parse_sweep_csv(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty()) fail(ErrorKind::usage, "sweep CSV: empty");
    const auto header = split_csv(lines[0]);
    if (header.empty() || header[0] != "param" || header.size() % 2 != 1)
        fail(ErrorKind::usage, "sweep CSV: bad header");
    SweepTable t;
    t.parameter = "param";
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_csv(lines[i]);
        if (cells.size() != header.size()) fail(ErrorKind::usage, "sweep CSV: ragged row " + std::to_string(i));
        SweepRow row;
        row.param = parse_double_cell(cells[0]);
        for (std::size_t k = 1; k + 1 < cells.size(); k += 2) {
            double re = parse_double_cell(cells[k]), im = parse_double_cell(cells[k + 1]);
            if (std::isnan(re) && std::isnan(im)) continue;
            row.eigenvalues.emplace_back(re, im);
        }
        t.grid.push_back(row.param);
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string trajectory_csv(const MomentSamples& s) {
    std::ostringstream out;
    out << "t";
    for (const auto& l : s.labels) out << ",re[" << l << "],im[" << l << "]";
    out << "\n";
    for (Eigen::Index r = 0; r < s.values.rows(); ++r) {
        out << format_fixed(s.times[r]);
        for (Eigen::Index c = 0; c < s.values.cols(); ++c)
            out << ',' << format_fixed(s.values(r, c).real()) << ',' << format_fixed(s.values(r, c).imag());
        out << "\n";
    }
    return out.str();
}

MomentSamples parse_trajectory_csv(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty()) fail(ErrorKind::usage, "trajectory CSV: empty");
    const auto header = split_csv(lines[0]);
    if (header.empty() || header[0] != "t" || header.size() % 2 != 1)
        fail(ErrorKind::usage, "trajectory CSV: bad header");
    MomentSamples s;
    for (std::size_t k = 1; k < header.size(); k += 2) {
        const auto& h = header[k];
        if (h.size() < 5 || h.rfind("re[", 0) != 0 || h.back() != ']')
            fail(ErrorKind::usage, "trajectory CSV: bad column '" + h + "'");
        s.labels.push_back(h.substr(3, h.size() - 4));
    }
    const auto m = static_cast<Eigen::Index>(s.labels.size());
    s.values.resize(static_cast<Eigen::Index>(lines.size() - 1), m);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_csv(lines[i]);
        if (cells.size() != header.size()) fail(ErrorKind::usage, "trajectory CSV: ragged row");
        s.times.push_back(parse_double_cell(cells[0]));
        for (Eigen::Index c = 0; c < m; ++c)
            s.values(i - 1, c) = {parse_double_cell(cells[1 + 2 * c]), parse_double_cell(cells[2 + 2 * c])};
    }
    return s;
}

}  // namespace epm
