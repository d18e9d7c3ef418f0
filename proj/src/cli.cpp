#include "epm/cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "epm/io.hpp"
#include "epm/moments.hpp"
#include "epm/nhh.hpp"
#include "epm/oracle.hpp"
#include "epm/spectral.hpp"

namespace epm {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        auto b = cur.find_first_not_of(" \t");
        auto e = cur.find_last_not_of(" \t");
        out.push_back(b == std::string::npos ? std::string{} : cur.substr(b, e - b + 1));
    }
    return out;
}

int parse_index(const std::string& s, int n, const std::string& key) {
    int v = 0;
    try {
        std::size_t used = 0;
        v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
        fail(ErrorKind::usage, "override '" + key + "': bad index '" + s + "'");
    }
    if (v < 1 || v > n) fail(ErrorKind::usage, "override '" + key + "': index out of range 1.." + std::to_string(n));
    return v - 1;
}

double real_value(const std::string& key, Complex v) {
    if (v.imag() != 0.0) fail(ErrorKind::usage, "override '" + key + "' takes a real value");
    return v.real();
}

std::string canonical_alias(const std::string& key) {
    if (key == "Δ" || key == "Delta") return "delta";
    if (key == "Γ" || key == "Gamma") return "gamma";
    if (key == "Γ12" || key == "Gamma12") return "gamma12";
    return key;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::usage, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream o(path, std::ios::binary | std::ios::trunc);
    if (!o) fail(ErrorKind::usage, "cannot write '" + path + "'");
    o << text;
    if (!o) fail(ErrorKind::usage, "write to '" + path + "' failed");
}

std::string cfmt(Complex z) { return format_fixed(z.real()) + " " + format_fixed(z.imag()) + "i"; }

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

void apply_override(QuadraticSystem& sys, const std::string& raw_key, Complex value) {
    const std::string key = canonical_alias(raw_key);
    const int n = sys.n_modes;
    if (key == "delta" || key == "gamma12") {
        if (n != 2) fail(ErrorKind::usage, "override '" + key + "' needs a two-mode model");
        const double v = real_value(key, value);
        if (key == "delta") {
            sys.detunings << v, -v;
        } else {
            sys.decoherence(0, 1) = v;
            sys.decoherence(1, 0) = v;
        }
        return;
    }
    if (key == "gamma") {
        const double v = real_value(key, value);
        for (int j = 0; j < n; ++j) sys.decoherence(j, j) = v;
        return;
    }
    const auto parts = split(key, '.');
    if (parts.size() == 2 && parts[0] == "detunings") {
        sys.detunings(parse_index(parts[1], n, key)) = real_value(key, value);
        return;
    }
    if (parts.size() == 3 && (parts[0] == "coherent" || parts[0] == "squeezing" || parts[0] == "decoherence")) {
        const int j = parse_index(parts[1], n, key);
        const int k = parse_index(parts[2], n, key);
        CMatrix& m = parts[0] == "coherent" ? sys.coherent : parts[0] == "squeezing" ? sys.squeezing : sys.decoherence;
        if (parts[0] == "squeezing") {
            m(j, k) = value;
            m(k, j) = value;
        } else {
            if (j == k && value.imag() != 0.0)
                fail(ErrorKind::usage, "override '" + key + "': diagonal entries are real");
            m(j, k) = value;
            m(k, j) = std::conj(value);
        }
        return;
    }
    fail(ErrorKind::usage, "unknown override key '" + raw_key + "'");
}

void apply_override(QuadraticSystem& sys, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorKind::usage, "override '" + assignment + "' is not key=value");
    Complex v;
    try {
        v = parse_complex(assignment.substr(eq + 1));
    } catch (const Error& e) {
        fail(ErrorKind::usage, "override '" + assignment + "': " + e.what());
    }
    apply_override(sys, assignment.substr(0, eq), v);
}

namespace {

struct Common {
    std::string model;
    std::vector<std::string> overrides;
    std::string out_path;
    std::string format;
};

struct MomentOpts {
    int order = 1;
    bool reduce = false;
    bool full = false;
    std::string basis;
};

QuadraticSystem load(const Common& c) {
    auto sys = parse_model(read_file(c.model));
    for (const auto& o : c.overrides) apply_override(sys, o);
    return sys;
}

MomentBasis parse_basis(const std::string& list) {
    MomentBasis b;
    for (const auto& label : split(list, ',')) {
        if (label.empty()) fail(ErrorKind::usage, "empty entry in --basis");
        b.entries.push_back(MomentIndex::parse(label));
    }
    if (b.entries.empty()) fail(ErrorKind::usage, "--basis is empty");
    return b;
}

bool wants_reduce(const MomentOpts& o, bool reduce_by_default) {
    if (o.reduce && o.full) fail(ErrorKind::usage, "--reduce and --full are exclusive");
    return reduce_by_default ? !o.full : o.reduce;
}

/// Validated pipeline: first moments, Kronecker powers, optional reduction.
EvolutionMatrix evolution(const QuadraticSystem& sys, const MomentOpts& o, bool reduce_by_default) {
    const bool red = wants_reduce(o, reduce_by_default);
    EvolutionMatrix m;
    if (!o.basis.empty()) {
        m = moment_matrix_direct(sys, parse_basis(o.basis));
    } else {
        if (o.order < 1) fail(ErrorKind::usage, "--order must be at least 1");
        if (!is_u1_symmetric(sys))
            fail(ErrorKind::validation, "model has squeezing terms; --order needs a U(1) model, use --basis");
        m = moment_power(first_moment_matrix(sys, false), o.order);
    }
    return red && m.basis.entries.front().order() > 1 ? reduce(m) : m;
}

/// Same matrix without the physicality checks; used by sweeps, which may
/// cross into gain-like parameter regions.
EvolutionMatrix evolution_unchecked(const QuadraticSystem& sys, const MomentOpts& o, bool reduce_by_default) {
    const bool red = wants_reduce(o, reduce_by_default);
    const auto gen = QuadraticGenerator::from_system(sys);
    EvolutionMatrix m;
    if (!o.basis.empty()) {
        m.basis = parse_basis(o.basis);
        m.matrix = adjoint_moment_generator(gen, m.basis);
    } else {
        EvolutionMatrix first;
        first.basis = MomentBasis::annihilation(sys.n_modes);
        first.matrix = adjoint_moment_generator(gen, first.basis);
        first.n_modes = sys.n_modes;
        m = moment_power(first, o.order);
    }
    m.n_modes = sys.n_modes;
    return red && m.basis.entries.front().order() > 1 ? reduce(m) : m;
}

void print_matrix(std::ostream& out, const EvolutionMatrix& m) {
    const auto labels = m.basis.labels();
    out << "basis (" << labels.size() << "):";
    for (const auto& l : labels) out << " <" << l << ">";
    out << "\n";
    for (Eigen::Index r = 0; r < m.matrix.rows(); ++r) {
        out << "d<" << labels[r] << ">/dt =";
        for (Eigen::Index c = 0; c < m.matrix.cols(); ++c) {
            if (m.matrix(r, c) == Complex{}) continue;
            out << "  (" << cfmt(m.matrix(r, c)) << ")<" << labels[c] << ">";
        }
        out << "\n";
    }
}

void print_report(std::ostream& out, const EPReport& rep) {
    out << "clusters: " << rep.clusters.size() << "\n";
    for (std::size_t i = 0; i < rep.clusters.size(); ++i) {
        const auto& c = rep.clusters[i];
        out << "  " << cfmt(c.value) << "  alg " << c.algebraic_multiplicity << "  geo " << c.geometric_multiplicity
            << "  blocks [";
        for (std::size_t b = 0; b < rep.jordan[i].block_sizes.size(); ++b)
            out << (b ? "," : "") << rep.jordan[i].block_sizes[b];
        out << "]";
        if (rep.jordan[i].order >= 2) out << "  EP of order " << rep.jordan[i].order;
        out << "\n";
    }
    out << "max EP order: " << rep.max_order() << "\n";
}

Json eigen_json(const std::vector<Complex>& ev) {
    Json arr = Json::array();
    for (auto z : ev) arr.push_back(Json::array({z.real(), z.imag()}));
    return arr;
}

void require_format(const std::string& f, std::initializer_list<const char*> allowed) {
    if (f.empty()) return;
    for (const char* a : allowed)
        if (f == a) return;
    fail(ErrorKind::usage, "--format " + f + " is not supported by this subcommand");
}

void add_common(CLI::App* sub, Common& c, bool model = true) {
    if (model) {
        sub->add_option("model", c.model, "Model file")->required();
        sub->add_option("--set", c.overrides, "Parameter override key=value (repeatable)");
    }
    sub->add_option("--out", c.out_path, "Write the machine-readable artifact here");
    sub->add_option("--format", c.format, "Artifact format")->check(CLI::IsMember({"csv", "json"}));
}

void add_moment_opts(CLI::App* sub, MomentOpts& o, bool reduce_by_default) {
    sub->add_option("--order", o.order, "Moment order m (m-fold annihilation products)")->check(CLI::Range(1, 12));
    sub->add_option("--basis", o.basis, "Comma-separated moment labels instead of --order, e.g. \"a1,a1†\"");
    if (reduce_by_default)
        sub->add_flag("--full", o.full, "Keep every operator ordering instead of the reduced basis");
    else
        sub->add_flag("--reduce", o.reduce, "Merge moments equal up to commutation of distinct modes");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Moment evolution matrices, exceptional points and quantum-jump oracle checks", "ep-moments"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Print help for every subcommand and exit");

    Common common;
    MomentOpts mo;
    std::optional<double> tol_cluster;
    double tol_rank = kRankTol;

    auto* validate_cmd = app.add_subcommand("validate", "Check a model for physical consistency");
    add_common(validate_cmd, common);

    auto* matrix_cmd = app.add_subcommand("moments-matrix", "Evolution matrix of the m-th order moments");
    add_common(matrix_cmd, common);
    add_moment_opts(matrix_cmd, mo, false);

    auto* spectrum_cmd = app.add_subcommand("spectrum", "Eigenvalues and exceptional-point report");
    add_common(spectrum_cmd, common);
    add_moment_opts(spectrum_cmd, mo, true);

    auto* ep_cmd = app.add_subcommand("ep-order", "Exceptional-point report; exit 0 iff an EP is present");
    add_common(ep_cmd, common);
    add_moment_opts(ep_cmd, mo, true);

    for (auto* sub : {spectrum_cmd, ep_cmd}) {
        sub->add_option("--tol-cluster", tol_cluster, "Fixed clustering radius (default: adaptive)");
        sub->add_option("--tol-rank", tol_rank, "Relative singular-value threshold for ranks");
    }

    std::string param;
    double from = 0.0, to = 1.0;
    int steps = 2;
    auto* sweep_cmd = app.add_subcommand("sweep", "Eigenvalues along a parameter line (CSV)");
    add_common(sweep_cmd, common);
    add_moment_opts(sweep_cmd, mo, true);
    sweep_cmd->add_option("--param", param, "Override key to sweep, e.g. gamma12")->required();
    sweep_cmd->add_option("--from", from, "First grid value")->required();
    sweep_cmd->add_option("--to", to, "Last grid value")->required();
    sweep_cmd->add_option("--steps", steps, "Number of grid points")->required()->check(CLI::PositiveNumber);

    double extra_damping = 0.0;
    std::string graphml_path;
    auto* lattice_cmd = app.add_subcommand("design-lattice", "Synthesize a dissipative lattice for the moments");
    add_common(lattice_cmd, common);
    add_moment_opts(lattice_cmd, mo, true);
    lattice_cmd->add_option("--extra-damping", extra_damping, "Uniform extra damping s >= 0")
        ->check(CLI::NonNegativeNumber);
    lattice_cmd->add_option("--graphml", graphml_path, "Write the coupling graph as GraphML here");

    std::string alpha_list;
    SimConfig cfg;
    double verify_tol = 1e-6;
    std::string trajectory_path;
    auto* verify_cmd = app.add_subcommand("verify", "Compare exp(Mt) against a Fock-space master-equation run");
    add_common(verify_cmd, common);
    add_moment_opts(verify_cmd, mo, true);
    verify_cmd->add_option("--alpha", alpha_list, "Coherent amplitudes, one per mode, e.g. 0.6,0.3i")->required();
    verify_cmd->add_option("--cutoff", cfg.cutoff, "Fock cutoff per mode")->check(CLI::PositiveNumber);
    verify_cmd->add_option("--tmax", cfg.t_max, "Final time")->required()->check(CLI::NonNegativeNumber);
    verify_cmd->add_option("--dt", cfg.dt, "RK4 step")->check(CLI::PositiveNumber);
    verify_cmd->add_option("--tol", verify_tol, "Maximum allowed moment deviation");
    verify_cmd->add_option("--sample-every", cfg.sample_every, "RK4 steps between samples")
        ->check(CLI::PositiveNumber);
    verify_cmd->add_option("--leakage-tol", cfg.leakage_tol, "Maximum boundary-layer population");
    verify_cmd->add_option("--trajectory", trajectory_path, "Write the oracle moment trajectory CSV here");

    int mn_order = 1;
    double mn_gamma = 0.0, mn_gamma12 = 0.0, mn_delta = 0.0;
    auto* mn_cmd = app.add_subcommand("mn", "Reduced N-th order matrix of the two-mode anti-PT model");
    add_common(mn_cmd, common, false);
    mn_cmd->add_option("--N", mn_order, "Moment order N")->required()->check(CLI::Range(1, 64));
    mn_cmd->add_option("--gamma", mn_gamma, "On-site decoherence")->required();
    mn_cmd->add_option("--gamma12", mn_gamma12, "Dissipative coupling")->required();
    mn_cmd->add_option("--delta", mn_delta, "Detuning")->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (validate_cmd->parsed()) {
            require_format(common.format, {"json"});
            auto sys = load(common);
            const auto rep = validate(sys);
            out << (rep.ok ? "valid" : "INVALID") << " model, " << sys.n_modes << " modes, min decoherence eigenvalue "
                << format_fixed(rep.min_decoherence_eigenvalue) << "\n";
            for (const auto& f : rep.findings)
                out << (f.severity == Severity::error ? "error" : "warning") << " [" << f.code << "] " << f.message
                    << "\n";
            if (!common.out_path.empty()) write_file(common.out_path, dump(to_json(rep)));
            return rep.ok ? kExitOk : kExitValidation;
        }

        if (matrix_cmd->parsed()) {
            require_format(common.format, {"json"});
            const auto m = evolution(load(common), mo, false);
            print_matrix(out, m);
            if (!common.out_path.empty()) write_file(common.out_path, dump(to_json(m)));
            return kExitOk;
        }

        if (spectrum_cmd->parsed() || ep_cmd->parsed()) {
            require_format(common.format, {"json"});
            const auto m = evolution(load(common), mo, true);
            const auto ev = sorted_eigenvalues(m.matrix);
            const auto rep = analyze(m.matrix, tol_cluster, tol_rank);
            Json j;
            if (spectrum_cmd->parsed()) {
                out << "eigenvalues (" << ev.size() << "):\n";
                for (auto z : ev) out << "  " << cfmt(z) << "\n";
                j["eigenvalues"] = eigen_json(ev);
                j["report"] = to_json(rep);
            } else {
                j = to_json(rep);
            }
            print_report(out, rep);
            if (!common.out_path.empty()) write_file(common.out_path, dump(j));
            if (ep_cmd->parsed() && rep.max_order() < 2) {
                err << "no exceptional point at these parameters\n";
                return kExitVerification;
            }
            return kExitOk;
        }

        if (sweep_cmd->parsed()) {
            require_format(common.format, {"csv"});
            const auto base = load(common);
            {
                auto probe = base;
                apply_override(probe, param, Complex{from});
            }
            const auto grid = linspace(from, to, steps);
            const auto table = sweep(
                param,
                [&](double v) {
                    auto s = base;
                    apply_override(s, param, Complex{v});
                    return evolution_unchecked(s, mo, true).matrix;
                },
                grid, default_threads());
            int failed = 0, unphysical = 0;
            for (std::size_t i = 0; i < table.rows.size(); ++i) {
                if (!table.rows[i].error.empty()) {
                    ++failed;
                    err << "point " << format_fixed(table.rows[i].param) << ": " << table.rows[i].error << "\n";
                }
                auto s = base;
                apply_override(s, param, Complex{grid[i]});
                if (!validate(s).ok) ++unphysical;
            }
            const std::string csv = sweep_csv(table);
            if (common.out_path.empty())
                out << csv;
            else
                write_file(common.out_path, csv);
            if (unphysical > 0)
                err << unphysical << " of " << grid.size()
                    << " grid points fail model validation (e.g. gain-like decoherence); their spectra are formal\n";
            return failed > 0 ? kExitNumerical : kExitOk;
        }

        if (lattice_cmd->parsed()) {
            require_format(common.format, {"json"});
            const auto m = evolution(load(common), mo, true);
            const auto lat = synthesize_lattice(m, extra_damping);
            out << lattice_summary(lat);
            if (!common.out_path.empty()) write_file(common.out_path, dump(to_json(lat)));
            if (!graphml_path.empty()) write_file(graphml_path, lattice_graphml(lat));
            return kExitOk;
        }

        if (verify_cmd->parsed()) {
            require_format(common.format, {"json"});
            const auto sys = load(common);
            std::vector<Complex> alphas;
            for (const auto& a : split(alpha_list, ',')) alphas.push_back(parse_complex(a));
            if (static_cast<int>(alphas.size()) != sys.n_modes)
                fail(ErrorKind::usage, "--alpha needs one amplitude per mode");
            const auto m = evolution(sys, mo, true);
            const FockSpace space(sys.n_modes, cfg.cutoff);
            const auto rho0 = coherent_state(alphas, space);
            const auto rep = verify_moments(sys, rho0, m, cfg, verify_tol);
            for (std::size_t i = 0; i < rep.labels.size(); ++i)
                out << "<" << rep.labels[i] << ">  max deviation " << format_fixed(rep.per_moment_max_dev[i]) << "\n";
            out << "max deviation " << format_fixed(rep.max_dev) << " (tol " << format_fixed(rep.tol) << "): "
                << (rep.pass ? "PASS" : "FAIL") << "\n";
            if (!common.out_path.empty()) write_file(common.out_path, dump(to_json(rep)));
            if (!trajectory_path.empty()) write_file(trajectory_path, trajectory_csv(rep.oracle));
            return rep.pass ? kExitOk : kExitVerification;
        }

        if (mn_cmd->parsed()) {
            require_format(common.format, {"json"});
            const auto m = build_m_n(mn_order, mn_gamma, mn_gamma12, mn_delta);
            print_matrix(out, m);
            const auto ev = sorted_eigenvalues(m.matrix);
            out << "eigenvalues (" << ev.size() << "):\n";
            for (auto z : ev) out << "  " << cfmt(z) << "\n";
            const auto rep = analyze(m.matrix);
            print_report(out, rep);
            if (!common.out_path.empty()) {
                Json j;
                j["matrix"] = to_json(m);
                j["eigenvalues"] = eigen_json(ev);
                j["report"] = to_json(rep);
                write_file(common.out_path, dump(j));
            }
            return kExitOk;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::usage: return kExitUsage;
            case ErrorKind::validation: return kExitValidation;
            case ErrorKind::numerical: return kExitNumerical;
            case ErrorKind::verification: return kExitVerification;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}

}  // namespace epm
