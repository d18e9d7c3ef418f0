#include "epm/nhh.hpp"

#include <Eigen/Eigenvalues>

namespace epm {

NhhMatrix nhh_from_matrix_u1(const EvolutionMatrix& m) {
    if (m.matrix.rows() != m.matrix.cols()) fail(ErrorKind::usage, "nhh: matrix is not square");
    return {kI * m.matrix, m.basis};
}

NhhMatrix nhh_generic(const EvolutionMatrix& m) {
    const auto n = m.matrix.rows();
    if (n != m.matrix.cols()) fail(ErrorKind::usage, "nhh_generic: matrix is not square");
    if (n % 2 != 0) fail(ErrorKind::usage, "nhh_generic: interleaved basis needs an even dimension");
    Eigen::VectorXcd eta1(n), eta2(n), eta3(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const bool annihilation = k % 2 == 0;
        eta1(k) = annihilation ? 1.0 : 0.0;
        eta2(k) = annihilation ? 0.0 : 1.0;
        eta3(k) = annihilation ? -1.0 : 1.0;
    }
    CMatrix h = kI * eta1.asDiagonal() * m.matrix +
                kI * eta2.asDiagonal() * m.matrix.adjoint() * eta3.asDiagonal();
    return {h, m.basis};
}

CMatrix remove_trace(const CMatrix& h) {
    CMatrix out = h;
    if (h.rows() == 0) return out;
    out.diagonal().array() -= h.trace() / static_cast<double>(h.rows());
    return out;
}

LatticeModel synthesize_lattice(const EvolutionMatrix& m, double extra_damping) {
    const auto n = m.matrix.rows();
    if (n != m.matrix.cols() || n == 0) fail(ErrorKind::usage, "synthesize_lattice: matrix is not square");
    if (!(extra_damping >= 0.0)) fail(ErrorKind::usage, "synthesize_lattice: extra damping must be >= 0");

    CMatrix shifted = m.matrix;
    shifted.diagonal().array() -= extra_damping;

    LatticeModel lat;
    lat.n_modes = static_cast<int>(n);
    lat.nhh_h = kI * shifted;
    lat.hermitian_h = 0.5 * (lat.nhh_h + lat.nhh_h.adjoint());
    // Only this jump matrix cancels the cubic terms of d<b>/dt.
    CMatrix anti = (0.5 * kI) * (lat.nhh_h - lat.nhh_h.adjoint());
    lat.jump_gamma = anti.transpose();

    Eigen::SelfAdjointEigenSolver<CMatrix> es(lat.jump_gamma, Eigen::EigenvaluesOnly);
    lat.min_gamma_eigenvalue = es.eigenvalues().minCoeff();
    lat.psd = lat.min_gamma_eigenvalue >= -kPsdTol;
    lat.required_extra_damping = lat.psd ? 0.0 : -lat.min_gamma_eigenvalue;
    return lat;
}

QuadraticSystem lattice_system(const LatticeModel& lat) {
    auto sys = QuadraticSystem::zeros(lat.n_modes);
    sys.coherent = lat.hermitian_h;
    sys.decoherence = lat.jump_gamma.transpose();
    return sys;
}

EvolutionMatrix first_moment_of_lattice(const LatticeModel& lat) {
    const auto sys = lattice_system(lat);
    EvolutionMatrix out;
    out.basis = MomentBasis::annihilation(lat.n_modes);
    out.matrix = adjoint_moment_generator(QuadraticGenerator::from_system(sys), out.basis);
    out.n_modes = lat.n_modes;
    out.origin = system_fingerprint(sys);
    return out;
}

EvolutionMatrix build_m_n(int order, double gamma, double gamma12, double delta) {
    if (order < 1) fail(ErrorKind::usage, "build_m_n: order must be at least 1");
    const int dim = order + 1;
    EvolutionMatrix out;
    out.n_modes = 2;
    out.matrix = CMatrix::Zero(dim, dim);
    for (int n = 0; n <= order; ++n) {
        out.matrix(n, n) = Complex(-order * gamma, (2 * n - order) * delta);
        if (n > 0) out.matrix(n, n - 1) = -n * gamma12;
        if (n < order) out.matrix(n, n + 1) = -(order - n) * gamma12;
        std::vector<Ladder> f(order - n, Ladder{1, false});
        f.insert(f.end(), n, Ladder{2, false});
        out.basis.entries.emplace_back(std::move(f));
    }
    out.basis.kind = BasisKind::reduced;
    out.origin = system_fingerprint(QuadraticSystem::anti_pt_bimodal(delta, gamma, gamma12));
    return out;
}

}  // namespace epm
