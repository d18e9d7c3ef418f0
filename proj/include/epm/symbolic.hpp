#pragma once

#include <map>
#include <vector>

#include "epm/model.hpp"
#include "epm/types.hpp"

namespace epm {

/// Normal-ordered monomial  prod_j (a_j^+)^{c_j} prod_j a_j^{p_j}.
/// Layout: exps[0..n) creation exponents, exps[n..2n) annihilation exponents.
struct Monomial {
    std::vector<int> exps;

    int n_modes() const { return static_cast<int>(exps.size() / 2); }
    int degree() const;
    bool operator<(const Monomial& o) const { return exps < o.exps; }
    bool operator==(const Monomial& o) const { return exps == o.exps; }
};

/// Polynomial in bosonic ladder operators, kept in normal order.
class NormalPoly {
public:
    explicit NormalPoly(int n_modes) : n_(n_modes) {}

    static NormalPoly identity(int n_modes);
    static NormalPoly ladder(int n_modes, int mode, bool dagger);  // mode is 0-based

    int n_modes() const { return n_; }
    const std::map<Monomial, Complex>& terms() const { return terms_; }
    void add(const Monomial& m, Complex c);
    void prune(double tol = 0.0);

    NormalPoly& operator+=(const NormalPoly& o);
    NormalPoly& operator*=(Complex s);
    friend NormalPoly operator*(const NormalPoly& a, const NormalPoly& b);
    friend NormalPoly operator+(NormalPoly a, const NormalPoly& b) { return a += b; }
    friend NormalPoly operator-(NormalPoly a, const NormalPoly& b);

private:
    int n_;
    std::map<Monomial, Complex> terms_;
};

/// Quadratic generator of the master equation
///   d rho/dt = -i (H rho - rho H^+) + 2 sum_jk jump_jk a_j rho a_k^+
/// with H = sum_jk hop_jk a_j^+ a_k + sum_jk create_jk a_j^+ a_k^+ + sum_jk annihilate_jk a_j a_k.
/// H may be non-Hermitian; nothing ties the jump matrix to H here.
struct QuadraticGenerator {
    int n_modes = 0;
    CMatrix hop;
    CMatrix create;
    CMatrix annihilate;
    CMatrix jump;

    static QuadraticGenerator from_system(const QuadraticSystem& sys);

    NormalPoly hamiltonian() const;

    /// Heisenberg-picture generator applied to an observable:
    ///   i (H^+ O - O H) + 2 sum_jk jump_jk a_k^+ O a_j
    NormalPoly adjoint(const NormalPoly& op) const;
};

}  // namespace epm
