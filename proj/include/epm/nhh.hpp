#pragma once

#include "epm/model.hpp"
#include "epm/moments.hpp"
#include "epm/types.hpp"

namespace epm {

/// Matrix form H of a (moments-based) non-Hermitian Hamiltonian,
/// H_op = b^+ H b over the quantized modes b_j <-> basis entries.
struct NhhMatrix {
    CMatrix matrix;
    MomentBasis basis;
};

/// Dissipative lattice realizing a target first-moment matrix.
///
/// Dynamics: -i (H rho - rho H^+) + 2 sum_jk jump_gamma_jk b_j rho b_k^+,
/// where H = hermitian_h - i K and K is fixed by trace preservation.
struct LatticeModel {
    int n_modes = 0;
    CMatrix hermitian_h;
    CMatrix nhh_h;
    CMatrix jump_gamma;
    bool psd = false;
    double min_gamma_eigenvalue = 0.0;
    /// Uniform extra damping that would make jump_gamma positive semidefinite.
    double required_extra_damping = 0.0;
};

/// H = i M (U(1) systems, first-order or reduced matrices).
NhhMatrix nhh_from_matrix_u1(const EvolutionMatrix& m);

/// H = i eta1 M + i eta2 M^+ eta3 over the interleaved basis.
NhhMatrix nhh_generic(const EvolutionMatrix& m);

/// H - tr(H)/N I.
CMatrix remove_trace(const CMatrix& h);

/// Lattice whose first moments obey d<b>/dt = (M - s I) <b>.
LatticeModel synthesize_lattice(const EvolutionMatrix& m, double extra_damping = 0.0);

/// The lattice written as a QuadraticSystem (decoherence = jump_gamma^T).
QuadraticSystem lattice_system(const LatticeModel& lat);

/// First-moment matrix of the lattice from its full master equation.
EvolutionMatrix first_moment_of_lattice(const LatticeModel& lat);

/// (N+1)x(N+1) tridiagonal reduced matrix of the N-th order moments of the
/// two-mode anti-PT model: diagonal i(2n - N) delta - N gamma, row n coupling
/// -n gamma12 to n-1 and -(N-n) gamma12 to n+1.
EvolutionMatrix build_m_n(int order, double gamma, double gamma12, double delta);

}  // namespace epm
