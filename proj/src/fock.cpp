#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "epm/oracle.hpp"

namespace epm {

FockSpace::FockSpace(int n_modes, int cutoff) : n_modes_(n_modes), cutoff_(cutoff), dim_(1) {
    if (n_modes < 1) fail(ErrorKind::usage, "Fock space needs at least one mode");
    if (cutoff < 1) fail(ErrorKind::usage, "Fock cutoff must be at least 1");
    for (int j = 0; j < n_modes; ++j) {
        dim_ *= cutoff + 1;
        if (dim_ > kMaxFockDim)
            fail(ErrorKind::usage, "Fock space dimension exceeds " + std::to_string(kMaxFockDim) +
                                       "; lower the cutoff or the number of modes");
    }
    strides_.resize(n_modes);
    Eigen::Index s = 1;
    for (int j = n_modes - 1; j >= 0; --j) {
        strides_[j] = s;
        s *= cutoff + 1;
    }
    for (int j = 0; j < n_modes; ++j) {
        std::vector<Eigen::Triplet<Complex>> trip;
        for (Eigen::Index st = 0; st < dim_; ++st) {
            int occ = occupation(st, j);
            if (occ > 0) trip.emplace_back(st - strides_[j], st, std::sqrt(static_cast<double>(occ)));
        }
        SparseOp a(dim_, dim_);
        a.setFromTriplets(trip.begin(), trip.end());
        ops_.push_back(std::move(a));
    }
}

FockSpace build_space(int n_modes, int cutoff) { return FockSpace(n_modes, cutoff); }

bool FockSpace::on_boundary(Eigen::Index state) const {
    for (int j = 0; j < n_modes_; ++j)
        if (occupation(state, j) == cutoff_) return true;
    return false;
}

SparseOp FockSpace::product(const MomentIndex& index) const {
    if (index.max_mode() > n_modes_)
        fail(ErrorKind::usage, "moment '" + index.label() + "' refers to a mode outside the Fock space");
    SparseOp p(dim_, dim_);
    p.setIdentity();
    for (const auto& f : index.factors()) {
        const int j = f.mode - 1;
        if (f.dagger)
            p = SparseOp(p * creation(j));
        else
            p = SparseOp(p * ops_[j]);
    }
    return p;
}

double DensityMatrix::min_eigenvalue() const {
    CMatrix h = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double DensityMatrix::boundary_population(const FockSpace& space) const {
    double p = 0.0;
    for (Eigen::Index s = 0; s < space.dim(); ++s)
        if (space.on_boundary(s)) p += rho(s, s).real();
    return p;
}

DensityMatrix coherent_state(const std::vector<Complex>& alphas, const FockSpace& space) {
    if (static_cast<int>(alphas.size()) != space.n_modes())
        fail(ErrorKind::usage, "coherent_state: need one amplitude per mode");
    const int c = space.cutoff();
    CVector psi = CVector::Ones(1);
    for (const auto alpha : alphas) {
        if (std::norm(alpha) > c / 4.0)
            fail(ErrorKind::usage, "coherent amplitude too large for cutoff " + std::to_string(c) +
                                       " (need |alpha|^2 <= cutoff/4)");
        CVector mode(c + 1);
        Complex amp = std::exp(-0.5 * std::norm(alpha));
        for (int n = 0; n <= c; ++n) {
            mode(n) = amp;
            amp *= alpha / std::sqrt(static_cast<double>(n + 1));
        }
        mode.normalize();
        CVector next(psi.size() * mode.size());
        for (Eigen::Index i = 0; i < psi.size(); ++i) next.segment(i * mode.size(), mode.size()) = psi(i) * mode;
        psi = std::move(next);
    }
    return {psi * psi.adjoint()};
}

}  // namespace epm
