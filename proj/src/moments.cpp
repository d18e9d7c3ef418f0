#include "epm/moments.hpp"

#include <algorithm>
#include <map>

#include <unsupported/Eigen/MatrixFunctions>

namespace epm {

// ---------------------------------------------------------------------------
// labels

MomentIndex::MomentIndex(std::vector<Ladder> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) fail(ErrorKind::usage, "moment label must contain at least one factor");
    for (const auto& f : factors_)
        if (f.mode < 1) fail(ErrorKind::usage, "moment mode indices are 1-based");
}

MomentIndex MomentIndex::parse(std::string_view label) {
    std::vector<Ladder> out;
    std::size_t i = 0;
    auto bad = [&](const std::string& why) -> void {
        fail(ErrorKind::usage, "bad moment label '" + std::string(label) + "': " + why);
    };
    while (i < label.size()) {
        if (label[i] == ' ' || label[i] == '\t') {
            ++i;
            continue;
        }
        if (label[i] != 'a') bad("expected 'a' at position " + std::to_string(i));
        ++i;
        std::size_t start = i;
        while (i < label.size() && label[i] >= '0' && label[i] <= '9') ++i;
        if (start == i) bad("missing mode index");
        Ladder l;
        l.mode = std::stoi(std::string(label.substr(start, i - start)));
        static constexpr std::string_view kDagger = "†";
        if (label.substr(i, kDagger.size()) == kDagger) {
            l.dagger = true;
            i += kDagger.size();
        } else if (i < label.size() && label[i] == '\'') {
            l.dagger = true;
            ++i;
        }
        if (i < label.size() && label[i] != ' ' && label[i] != '\t') bad("factors must be separated by spaces");
        out.push_back(l);
    }
    return MomentIndex(std::move(out));
}

int MomentIndex::max_mode() const {
    int m = 0;
    for (const auto& f : factors_) m = std::max(m, f.mode);
    return m;
}

MomentIndex MomentIndex::canonical_key() const {
    auto f = factors_;
    std::stable_sort(f.begin(), f.end(), [](const Ladder& x, const Ladder& y) { return x.mode < y.mode; });
    return MomentIndex(std::move(f));
}

std::string MomentIndex::label() const {
    std::string s;
    for (const auto& f : factors_) {
        if (!s.empty()) s += ' ';
        s += 'a' + std::to_string(f.mode);
        if (f.dagger) s += "†";
    }
    return s;
}

MomentIndex MomentIndex::concat(const MomentIndex& tail) const {
    auto f = factors_;
    f.insert(f.end(), tail.factors_.begin(), tail.factors_.end());
    return MomentIndex(std::move(f));
}

NormalPoly MomentIndex::to_poly(int n_modes) const {
    if (max_mode() > n_modes)
        fail(ErrorKind::usage, "moment '" + label() + "' refers to a mode beyond n_modes");
    NormalPoly p = NormalPoly::identity(n_modes);
    for (const auto& f : factors_) p = p * NormalPoly::ladder(n_modes, f.mode - 1, f.dagger);
    return p;
}

std::vector<std::string> MomentBasis::labels() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.label());
    return out;
}

MomentBasis MomentBasis::annihilation(int n_modes) {
    MomentBasis b;
    for (int j = 1; j <= n_modes; ++j) b.entries.emplace_back(std::vector<Ladder>{{j, false}});
    return b;
}

MomentBasis MomentBasis::interleaved(int n_modes) {
    MomentBasis b;
    for (int j = 1; j <= n_modes; ++j) {
        b.entries.emplace_back(std::vector<Ladder>{{j, false}});
        b.entries.emplace_back(std::vector<Ladder>{{j, true}});
    }
    return b;
}

// ---------------------------------------------------------------------------
// builders

std::uint64_t system_fingerprint(const QuadraticSystem& sys) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : serialize_model(sys)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h == 0 ? 1 : h;
}

CMatrix adjoint_moment_generator(const QuadraticGenerator& gen, const MomentBasis& basis) {
    const int n = gen.n_modes;
    const auto dim = static_cast<Eigen::Index>(basis.size());
    std::vector<NormalPoly> polys;
    std::vector<NormalPoly> derivs;
    std::map<Monomial, Eigen::Index> slot;
    auto index_of = [&](const NormalPoly& p) {
        for (const auto& [m, c] : p.terms()) slot.try_emplace(m, static_cast<Eigen::Index>(slot.size()));
    };
    for (const auto& e : basis.entries) {
        polys.push_back(e.to_poly(n));
        derivs.push_back(gen.adjoint(polys.back()));
        index_of(polys.back());
        index_of(derivs.back());
    }
    const auto rows = static_cast<Eigen::Index>(slot.size());
    CMatrix span = CMatrix::Zero(rows, dim);
    CMatrix rhs = CMatrix::Zero(rows, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        for (const auto& [m, c] : polys[j].terms()) span(slot.at(m), j) = c;
        for (const auto& [m, c] : derivs[j].terms()) rhs(slot.at(m), j) = c;
    }
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(span);
    CMatrix coeffs = cod.solve(rhs);  // column i: d(entry i)/dt in terms of the basis
    const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < dim; ++i) {
        double resid = (span * coeffs.col(i) - rhs.col(i)).cwiseAbs().maxCoeff();
        if (resid > 1e-12 * scale)
            fail(ErrorKind::numerical, "closure violation: d<" + basis.entries[i].label() +
                                           ">/dt leaves the span of the basis (residual " +
                                           std::to_string(resid) + ")");
    }
    return coeffs.transpose();
}

EvolutionMatrix moment_matrix_direct(const QuadraticSystem& sys, const MomentBasis& basis) {
    require_valid(sys);
    EvolutionMatrix out;
    out.matrix = adjoint_moment_generator(QuadraticGenerator::from_system(sys), basis);
    out.basis = basis;
    out.n_modes = sys.n_modes;
    out.origin = system_fingerprint(sys);
    return out;
}

EvolutionMatrix first_moment_matrix(const QuadraticSystem& sys, bool interleaved) {
    require_valid(sys);
    if (!interleaved && !is_u1_symmetric(sys))
        fail(ErrorKind::validation, "system is not U(1)-symmetric; the interleaved basis is required");
    return moment_matrix_direct(sys, interleaved ? MomentBasis::interleaved(sys.n_modes)
                                                 : MomentBasis::annihilation(sys.n_modes));
}

EvolutionMatrix kronecker_sum(const EvolutionMatrix& a, const EvolutionMatrix& b) {
    if (a.n_modes != b.n_modes || (a.origin != 0 && b.origin != 0 && a.origin != b.origin))
        fail(ErrorKind::usage, "kronecker_sum: matrices belong to different systems");
    if (a.matrix.rows() != a.matrix.cols() || b.matrix.rows() != b.matrix.cols())
        fail(ErrorKind::usage, "kronecker_sum: matrices must be square");
    const auto na = a.matrix.rows();
    const auto nb = b.matrix.rows();
    EvolutionMatrix out;
    out.n_modes = a.n_modes;
    out.origin = a.origin ? a.origin : b.origin;
    out.matrix = CMatrix::Zero(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i) {
        for (Eigen::Index k = 0; k < na; ++k) {
            const Complex aik = a.matrix(i, k);
            if (aik == Complex{}) continue;
            for (Eigen::Index j = 0; j < nb; ++j) out.matrix(i * nb + j, k * nb + j) += aik;
        }
        out.matrix.block(i * nb, i * nb, nb, nb) += b.matrix;
    }
    const bool labelled = a.basis.size() == static_cast<std::size_t>(na) &&
                          b.basis.size() == static_cast<std::size_t>(nb);
    if (labelled) {
        out.basis.entries.reserve(na * nb);
        for (const auto& x : a.basis.entries)
            for (const auto& y : b.basis.entries) out.basis.entries.push_back(x.concat(y));
    }
    out.basis.kind = BasisKind::full;
    return out;
}

EvolutionMatrix moment_power(const EvolutionMatrix& first, int m) {
    if (m < 1) fail(ErrorKind::usage, "moment_power: order must be at least 1");
    EvolutionMatrix out = first;
    for (int i = 1; i < m; ++i) out = kronecker_sum(out, first);
    return out;
}

EvolutionMatrix reduce(const EvolutionMatrix& full, double consistency_tol) {
    const auto n = full.matrix.rows();
    if (full.basis.size() != static_cast<std::size_t>(n))
        fail(ErrorKind::usage, "reduce: matrix carries no basis labels");
    std::vector<MomentIndex> reps;
    std::vector<Eigen::Index> rep_row;
    std::map<MomentIndex, Eigen::Index> class_of_key;
    std::vector<Eigen::Index> cls(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        auto key = full.basis.entries[i].canonical_key();
        auto [it, inserted] = class_of_key.try_emplace(key, static_cast<Eigen::Index>(reps.size()));
        if (inserted) {
            reps.push_back(full.basis.entries[i]);
            rep_row.push_back(i);
        }
        cls[i] = it->second;
    }
    const auto k = static_cast<Eigen::Index>(reps.size());
    CMatrix merged = CMatrix::Zero(n, k);
    for (Eigen::Index c = 0; c < n; ++c) merged.col(cls[c]) += full.matrix.col(c);

    const double scale = std::max(1.0, full.matrix.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < n; ++i) {
        double dev = (merged.row(i) - merged.row(rep_row[cls[i]])).cwiseAbs().maxCoeff();
        if (dev > consistency_tol * scale)
            fail(ErrorKind::numerical, "reduce: row of <" + full.basis.entries[i].label() +
                                           "> disagrees with its class representative <" +
                                           reps[cls[i]].label() + "> (non-closure)");
    }
    EvolutionMatrix out;
    out.n_modes = full.n_modes;
    out.origin = full.origin;
    out.matrix.resize(k, k);
    for (Eigen::Index r = 0; r < k; ++r) out.matrix.row(r) = merged.row(rep_row[r]);
    out.basis.entries = std::move(reps);
    out.basis.kind = BasisKind::reduced;
    return out;
}

bool kronecker_exact(const QuadraticSystem& sys, const MomentBasis& basis) {
    for (const auto& e : basis.entries) {
        const auto& f = e.factors();
        for (std::size_t p = 0; p < f.size(); ++p) {
            if (f[p].dagger) continue;
            for (std::size_t q = p + 1; q < f.size(); ++q) {
                if (!f[q].dagger) continue;
                if (f[p].mode > sys.n_modes || f[q].mode > sys.n_modes) return false;
                if (sys.decoherence(f[q].mode - 1, f[p].mode - 1) != Complex{}) return false;
            }
        }
    }
    return true;
}

std::vector<CVector> propagate_moments(const CMatrix& m, const CVector& v0, const std::vector<double>& times) {
    if (m.rows() != m.cols() || v0.size() != m.rows())
        fail(ErrorKind::usage, "propagate_moments: dimension mismatch");
    std::vector<CVector> out;
    out.reserve(times.size());
    double prev = 0.0;
    for (double t : times) {
        if (t < prev || !(t >= 0.0)) fail(ErrorKind::usage, "propagate_moments: times must be non-decreasing and >= 0");
        prev = t;
        CMatrix mt = m * t;
        out.push_back(mt.exp() * v0);
    }
    return out;
}

std::vector<CVector> propagate_moments(const EvolutionMatrix& m, const CVector& v0, const std::vector<double>& times) {
    return propagate_moments(m.matrix, v0, times);
}

}  // namespace epm
