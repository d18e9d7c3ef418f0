#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "epm/types.hpp"

namespace epm {

inline constexpr double kHermTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;

/// An n-mode quadratic Liouvillian with loss-type dissipation.
///
/// Hamiltonian:  H = sum_j d_j a_j^+ a_j + sum_jk g_jk a_j^+ a_k
///                   + 1/2 sum_jk (x_jk a_j^+ a_k^+ + conj(x_jk) a_j a_k)
/// Dissipator:   2 sum_jk G_jk a_k rho a_j^+ - {K, rho},  K = sum_jk G_jk a_j^+ a_k
///
/// With this convention the first-moment matrix of the U(1) case is
/// -i diag(d) - i g - G, and amplitudes decay at G_jj while populations
/// decay at 2 G_jj.
struct QuadraticSystem {
    int n_modes = 0;
    RVector detunings;      // d_j
    CMatrix coherent;       // g, Hermitian
    CMatrix squeezing;      // x, symmetric
    CMatrix decoherence;    // G, Hermitian, positive semidefinite

    static QuadraticSystem zeros(int n_modes);

    /// Two modes with detunings (delta, -delta), no coherent coupling and
    /// decoherence [[gamma, gamma12], [gamma12, gamma]].
    static QuadraticSystem anti_pt_bimodal(double delta, double gamma, double gamma12);
};

enum class Severity { error, warning };

struct Finding {
    Severity severity;
    std::string code;
    std::string message;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Finding> findings;
    double min_decoherence_eigenvalue = 0.0;
};

QuadraticSystem parse_model(std::string_view text);
std::string serialize_model(const QuadraticSystem& sys);

ValidationReport validate(const QuadraticSystem& sys);

/// Throws Error(validation) listing the error findings when validate() fails.
void require_valid(const QuadraticSystem& sys);

bool is_u1_symmetric(const QuadraticSystem& sys);

/// True iff P conj(H) P == -H, P the mode-reversal permutation.
bool check_anti_pt(const CMatrix& h, double tol = 1e-10);

/// Parses `a`, `a+bi`, `bi`, `-i`, ... into a complex number.
Complex parse_complex(std::string_view token);
/// Shortest text that parses back to exactly the same value.
std::string format_complex(Complex z);

}  // namespace epm
