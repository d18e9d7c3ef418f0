#include "epm/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace epm {

QuadraticSystem QuadraticSystem::zeros(int n_modes) {
    if (n_modes < 1) fail(ErrorKind::validation, "n_modes must be positive");
    QuadraticSystem sys;
    sys.n_modes = n_modes;
    sys.detunings = RVector::Zero(n_modes);
    sys.coherent = CMatrix::Zero(n_modes, n_modes);
    sys.squeezing = CMatrix::Zero(n_modes, n_modes);
    sys.decoherence = CMatrix::Zero(n_modes, n_modes);
    return sys;
}

QuadraticSystem QuadraticSystem::anti_pt_bimodal(double delta, double gamma, double gamma12) {
    auto sys = zeros(2);
    sys.detunings << delta, -delta;
    sys.decoherence << gamma, gamma12, gamma12, gamma;
    return sys;
}

// ---------------------------------------------------------------------------
// complex number text

namespace {

double parse_real(std::string_view s, std::string_view whole) {
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        fail(ErrorKind::validation, "non-numeric entry '" + std::string(whole) + "'");
    return v;
}

}  // namespace

Complex parse_complex(std::string_view token) {
    if (token.empty()) fail(ErrorKind::validation, "empty numeric entry");
    if (token.back() != 'i' && token.back() != 'j') {
        return {parse_real(token, token), 0.0};
    }
    std::string_view body = token.substr(0, token.size() - 1);
    // split at the last sign that is not leading and not an exponent sign
    std::size_t split = std::string_view::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
        char c = body[k];
        if ((c == '+' || c == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    if (split == std::string_view::npos) {
        if (body.empty()) return {0.0, 1.0};
        return {0.0, parse_real(body, token)};
    }
    return {parse_real(body.substr(0, split), token), parse_real(body.substr(split), token)};
}

std::string format_complex(Complex z) {
    z += Complex{0.0, 0.0};  // no "-0"
    char buf[64];
    if (z.imag() == 0.0 && !std::signbit(z.imag())) {
        std::snprintf(buf, sizeof buf, "%.17g", z.real());
        return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g%c%.17gi", z.real(), std::signbit(z.imag()) ? '-' : '+',
                  std::abs(z.imag()));
    return buf;
}

// ---------------------------------------------------------------------------
// model file

namespace {

std::string strip(std::string_view s) {
    auto hash = s.find('#');
    if (hash != std::string_view::npos) s = s.substr(0, hash);
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> tokens(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    for (std::string t; is >> t;) out.push_back(t);
    return out;
}

[[noreturn]] void syntax(int line, const std::string& msg) {
    fail(ErrorKind::validation, "model line " + std::to_string(line) + ": " + msg);
}

struct Section {
    std::string name;
    int first_line = 0;
    std::vector<std::pair<int, std::vector<std::string>>> rows;
};

CMatrix matrix_section(const Section& s, int n) {
    CMatrix m = CMatrix::Zero(n, n);
    if (static_cast<int>(s.rows.size()) != n)
        fail(ErrorKind::validation, "dimension mismatch in [" + s.name + "] (line " +
                                        std::to_string(s.first_line) + "): expected " +
                                        std::to_string(n) + " rows, got " +
                                        std::to_string(s.rows.size()));
    for (int r = 0; r < n; ++r) {
        const auto& [line, toks] = s.rows[r];
        if (static_cast<int>(toks.size()) != n)
            fail(ErrorKind::validation, "dimension mismatch in [" + s.name + "] line " +
                                            std::to_string(line) + ": expected " +
                                            std::to_string(n) + " entries, got " +
                                            std::to_string(toks.size()));
        for (int c = 0; c < n; ++c) {
            try {
                m(r, c) = parse_complex(toks[c]);
            } catch (const Error& e) {
                syntax(line, e.what());
            }
        }
    }
    return m;
}

}  // namespace

QuadraticSystem parse_model(std::string_view text) {
    std::vector<Section> sections;
    std::istringstream in{std::string(text)};
    int lineno = 0;
    for (std::string raw; std::getline(in, raw);) {
        ++lineno;
        auto line = strip(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') syntax(lineno, "unterminated section header");
            auto name = strip(line.substr(1, line.size() - 2));
            static const char* known[] = {"system", "detunings", "coherent", "squeezing", "decoherence"};
            if (std::find(std::begin(known), std::end(known), name) == std::end(known))
                syntax(lineno, "unknown section [" + name + "]");
            for (const auto& s : sections)
                if (s.name == name) syntax(lineno, "duplicate section [" + name + "]");
            sections.push_back({name, lineno, {}});
            continue;
        }
        if (sections.empty()) syntax(lineno, "entry outside of any section");
        std::replace(line.begin(), line.end(), '=', ' ');
        sections.back().rows.emplace_back(lineno, tokens(line));
    }

    auto find = [&](const std::string& name) -> const Section* {
        for (const auto& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    };

    const Section* system = find("system");
    if (!system) fail(ErrorKind::validation, "model: missing [system] section");
    int n = 0;
    for (const auto& [line, toks] : system->rows) {
        if (toks.size() != 2) syntax(line, "expected 'key = value'");
        if (toks[0] != "n_modes") syntax(line, "unknown key '" + toks[0] + "'");
        int v = 0;
        auto [p, ec] = std::from_chars(toks[1].data(), toks[1].data() + toks[1].size(), v);
        if (ec != std::errc{} || p != toks[1].data() + toks[1].size() || v < 1)
            syntax(line, "n_modes must be a positive integer");
        n = v;
    }
    if (n == 0) fail(ErrorKind::validation, "model: n_modes not given");

    auto sys = QuadraticSystem::zeros(n);
    if (const Section* s = find("detunings")) {
        std::vector<double> values;
        int last = s->first_line;
        for (const auto& [line, toks] : s->rows) {
            last = line;
            for (const auto& t : toks) {
                Complex z;
                try {
                    z = parse_complex(t);
                } catch (const Error& e) {
                    syntax(line, e.what());
                }
                if (z.imag() != 0.0) syntax(line, "detunings must be real");
                values.push_back(z.real());
            }
        }
        if (static_cast<int>(values.size()) != n)
            fail(ErrorKind::validation, "dimension mismatch in [detunings] (line " +
                                            std::to_string(last) + "): expected " +
                                            std::to_string(n) + " values, got " +
                                            std::to_string(values.size()));
        for (int j = 0; j < n; ++j) sys.detunings(j) = values[j];
    }
    if (const Section* s = find("coherent")) sys.coherent = matrix_section(*s, n);
    if (const Section* s = find("squeezing")) sys.squeezing = matrix_section(*s, n);
    if (const Section* s = find("decoherence")) sys.decoherence = matrix_section(*s, n);
    return sys;
}

std::string serialize_model(const QuadraticSystem& sys) {
    std::ostringstream out;
    out << "[system]\nn_modes = " << sys.n_modes << "\n\n[detunings]\n";
    for (int j = 0; j < sys.n_modes; ++j) out << (j ? " " : "") << format_complex(sys.detunings(j));
    out << "\n";
    auto block = [&](const char* name, const CMatrix& m) {
        out << "\n[" << name << "]\n";
        for (int r = 0; r < m.rows(); ++r) {
            for (int c = 0; c < m.cols(); ++c) out << (c ? " " : "") << format_complex(m(r, c));
            out << "\n";
        }
    };
    block("coherent", sys.coherent);
    block("squeezing", sys.squeezing);
    block("decoherence", sys.decoherence);
    return out.str();
}

// ---------------------------------------------------------------------------
// validation

namespace {

double scale_of(const CMatrix& m) { return std::max(1.0, m.cwiseAbs().maxCoeff()); }

}  // namespace

ValidationReport validate(const QuadraticSystem& sys) {
    ValidationReport rep;
    auto error = [&](std::string code, std::string msg) {
        rep.findings.push_back({Severity::error, std::move(code), std::move(msg)});
        rep.ok = false;
    };
    const int n = sys.n_modes;
    if (n < 1) {
        error("n-modes", "n_modes must be positive");
        return rep;
    }
    bool shapes = true;
    auto check_shape = [&](const char* name, const CMatrix& m) {
        if (m.rows() != n || m.cols() != n) {
            error("dimension", std::string(name) + " is not " + std::to_string(n) + "x" + std::to_string(n));
            shapes = false;
        }
    };
    if (sys.detunings.size() != n) {
        error("dimension", "detunings length differs from n_modes");
        shapes = false;
    }
    check_shape("coherent", sys.coherent);
    check_shape("squeezing", sys.squeezing);
    check_shape("decoherence", sys.decoherence);
    if (!shapes) return rep;

    if (!sys.detunings.allFinite() || !sys.coherent.allFinite() || !sys.squeezing.allFinite() ||
        !sys.decoherence.allFinite()) {
        error("non-finite", "model contains non-finite entries");
        return rep;
    }

    auto herm_dev = [](const CMatrix& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); };
    if (herm_dev(sys.coherent) > kHermTol * scale_of(sys.coherent))
        error("coherent-not-hermitian", "coherent coupling is not Hermitian");
    if ((sys.squeezing - sys.squeezing.transpose()).cwiseAbs().maxCoeff() > kHermTol * scale_of(sys.squeezing))
        error("squeezing-not-symmetric", "squeezing coupling is not symmetric");
    if (herm_dev(sys.decoherence) > kHermTol * scale_of(sys.decoherence)) {
        error("decoherence-not-hermitian", "decoherence matrix is not Hermitian");
    } else if (sys.decoherence.imag().cwiseAbs().maxCoeff() > kHermTol * scale_of(sys.decoherence)) {
        rep.findings.push_back({Severity::warning, "chiral-decoherence",
                                "decoherence has G_jk != G_kj; only symmetric decoherence is exercised"});
    }

    CMatrix herm = 0.5 * (sys.decoherence + sys.decoherence.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm, Eigen::EigenvaluesOnly);
    rep.min_decoherence_eigenvalue = es.eigenvalues().minCoeff();
    if (rep.min_decoherence_eigenvalue < -kPsdTol) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "gain-like decoherence: minimum eigenvalue %.6g < 0",
                      rep.min_decoherence_eigenvalue);
        error("gain-like-decoherence", buf);
    }
    return rep;
}

void require_valid(const QuadraticSystem& sys) {
    auto rep = validate(sys);
    if (rep.ok) return;
    std::string msg = "invalid system:";
    for (const auto& f : rep.findings)
        if (f.severity == Severity::error) msg += " " + f.message + ";";
    fail(ErrorKind::validation, msg);
}

bool is_u1_symmetric(const QuadraticSystem& sys) {
    return sys.squeezing.size() == 0 || sys.squeezing.cwiseAbs().maxCoeff() <= kHermTol;
}

bool check_anti_pt(const CMatrix& h, double tol) {
    if (h.rows() != h.cols()) fail(ErrorKind::usage, "check_anti_pt: matrix is not square");
    const auto n = h.rows();
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            if (std::abs(std::conj(h(n - 1 - r, n - 1 - c)) + h(r, c)) > tol) return false;
    return true;
}

}  // namespace epm
