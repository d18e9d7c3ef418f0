#include "epm/symbolic.hpp"

#include <numeric>

namespace epm {

int Monomial::degree() const { return std::accumulate(exps.begin(), exps.end(), 0); }

NormalPoly NormalPoly::identity(int n_modes) {
    NormalPoly p(n_modes);
    p.add(Monomial{std::vector<int>(2 * n_modes, 0)}, 1.0);
    return p;
}

NormalPoly NormalPoly::ladder(int n_modes, int mode, bool dagger) {
    NormalPoly p(n_modes);
    Monomial m{std::vector<int>(2 * n_modes, 0)};
    m.exps[dagger ? mode : n_modes + mode] = 1;
    p.add(m, 1.0);
    return p;
}

void NormalPoly::add(const Monomial& m, Complex c) {
    if (c == Complex{}) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) it->second += c;
}

void NormalPoly::prune(double tol) {
    std::erase_if(terms_, [tol](const auto& kv) { return std::abs(kv.second) <= tol; });
}

NormalPoly& NormalPoly::operator+=(const NormalPoly& o) {
    for (const auto& [m, c] : o.terms_) add(m, c);
    return *this;
}

NormalPoly& NormalPoly::operator*=(Complex s) {
    for (auto& kv : terms_) kv.second *= s;
    return *this;
}

NormalPoly operator-(NormalPoly a, const NormalPoly& b) {
    for (const auto& [m, c] : b.terms()) a.add(m, -c);
    return a;
}

namespace {

double falling_choose(int p, int q, int k) {
    // C(p,k) C(q,k) k!
    double v = 1.0;
    for (int i = 0; i < k; ++i) v *= static_cast<double>(p - i) * (q - i) / (i + 1);
    return v;
}

// Expands  a^+^{c1} (a^{p1} a^+^{c2}) a^{p2}  mode by mode.
void multiply_into(const Monomial& x, const Monomial& y, Complex coeff, int mode, Monomial& acc,
                   NormalPoly& out) {
    const int n = x.n_modes();
    if (mode == n) {
        out.add(acc, coeff);
        return;
    }
    const int c1 = x.exps[mode], p1 = x.exps[n + mode];
    const int c2 = y.exps[mode], p2 = y.exps[n + mode];
    for (int k = 0; k <= std::min(p1, c2); ++k) {
        acc.exps[mode] = c1 + c2 - k;
        acc.exps[n + mode] = p1 - k + p2;
        multiply_into(x, y, coeff * falling_choose(p1, c2, k), mode + 1, acc, out);
    }
}

NormalPoly dagger(const NormalPoly& p) {
    const int n = p.n_modes();
    NormalPoly out(n);
    for (const auto& [m, c] : p.terms()) {
        Monomial d{std::vector<int>(2 * n)};
        for (int j = 0; j < n; ++j) {
            d.exps[j] = m.exps[n + j];
            d.exps[n + j] = m.exps[j];
        }
        out.add(d, std::conj(c));
    }
    return out;
}

}  // namespace

NormalPoly operator*(const NormalPoly& a, const NormalPoly& b) {
    NormalPoly out(a.n_modes());
    Monomial acc{std::vector<int>(2 * a.n_modes())};
    for (const auto& [ma, ca] : a.terms())
        for (const auto& [mb, cb] : b.terms()) multiply_into(ma, mb, ca * cb, 0, acc, out);
    return out;
}

QuadraticGenerator QuadraticGenerator::from_system(const QuadraticSystem& sys) {
    QuadraticGenerator gen;
    gen.n_modes = sys.n_modes;
    gen.hop = sys.coherent - kI * sys.decoherence;
    gen.hop.diagonal() += sys.detunings.cast<Complex>();
    gen.create = 0.5 * sys.squeezing;
    gen.annihilate = 0.5 * sys.squeezing.conjugate();
    // 2 sum_jk G_jk a_k rho a_j^+  ->  coefficient of a_j rho a_k^+ is G_kj
    gen.jump = sys.decoherence.transpose();
    return gen;
}

NormalPoly QuadraticGenerator::hamiltonian() const {
    const int n = n_modes;
    NormalPoly h(n);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            Monomial m{std::vector<int>(2 * n, 0)};
            m.exps[j] += 1;
            m.exps[n + k] += 1;
            h.add(m, hop(j, k));

            Monomial cc{std::vector<int>(2 * n, 0)};
            cc.exps[j] += 1;
            cc.exps[k] += 1;
            h.add(cc, create(j, k));

            Monomial aa{std::vector<int>(2 * n, 0)};
            aa.exps[n + j] += 1;
            aa.exps[n + k] += 1;
            h.add(aa, annihilate(j, k));
        }
    }
    return h;
}

NormalPoly QuadraticGenerator::adjoint(const NormalPoly& op) const {
    const int n = n_modes;
    const NormalPoly h = hamiltonian();
    NormalPoly out = dagger(h) * op - op * h;
    out *= kI;
    for (int j = 0; j < n; ++j) {
        const auto aj = NormalPoly::ladder(n, j, false);
        for (int k = 0; k < n; ++k) {
            if (jump(j, k) == Complex{}) continue;
            NormalPoly term = NormalPoly::ladder(n, k, true) * op * aj;
            term *= 2.0 * jump(j, k);
            out += term;
        }
    }
    out.prune();
    return out;
}

}  // namespace epm
