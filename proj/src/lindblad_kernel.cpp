#include <cmath>

#include <omp.h>

#include "epm/oracle.hpp"

namespace epm {

namespace {

// out = s * d, one density-matrix column per iteration
void sparse_times_dense(const SparseOp& s, const CMatrix& d, CMatrix& out) {
    const Eigen::Index n = d.rows();
    const Eigen::Index cols = d.cols();
    out.resize(n, cols);
#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < cols; ++c) {
        const Complex* col = d.col(c).data();
        Complex* dst = out.col(c).data();
        for (Eigen::Index r = 0; r < n; ++r) {
            Complex acc{};
            for (SparseOp::InnerIterator it(s, r); it; ++it) acc += it.value() * col[it.col()];
            dst[r] = acc;
        }
    }
}

}  // namespace

LindbladKernel::LindbladKernel(const QuadraticGenerator& gen, const FockSpace& space) : space_(space) {
    const int n = gen.n_modes;
    if (n != space.n_modes()) fail(ErrorKind::usage, "LindbladKernel: generator and Fock space differ in modes");
    const auto d = space.dim();
    h_ = SparseOp(d, d);
    std::vector<SparseOp> cre;
    for (int j = 0; j < n; ++j) cre.push_back(space.creation(j));
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            if (gen.hop(j, k) != Complex{}) h_ += SparseOp(gen.hop(j, k) * (cre[j] * space.annihilation(k)));
            if (gen.create(j, k) != Complex{}) h_ += SparseOp(gen.create(j, k) * (cre[j] * cre[k]));
            if (gen.annihilate(j, k) != Complex{})
                h_ += SparseOp(gen.annihilate(j, k) * (space.annihilation(j) * space.annihilation(k)));
        }
    }
    h_.prune(Complex{});
    h_.makeCompressed();
    for (int k = 0; k < n; ++k) {
        SparseOp b(d, d);
        for (int j = 0; j < n; ++j)
            if (gen.jump(j, k) != Complex{}) b += SparseOp(gen.jump(j, k) * space.annihilation(j));
        b.makeCompressed();
        jump_left_.push_back(std::move(b));
    }
}

void LindbladKernel::apply(const CMatrix& rho, CMatrix& out) const {
    const Eigen::Index d = space_.dim();
    if (rho.rows() != d || rho.cols() != d) fail(ErrorKind::usage, "Lindblad kernel: density matrix dimension mismatch");

    CMatrix x;
    sparse_times_dense(h_, rho, x);
    out.resize(d, d);
#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < d; ++c)
        for (Eigen::Index r = 0; r < d; ++r) out(r, c) = -kI * x(r, c) + kI * std::conj(x(c, r));

    // 2 sum_k B_k rho a_k^+ ;  (W a_k^+)(r, c) = sqrt(n_k(c) + 1) W(r, c + stride_k)
    CMatrix w;
    const int cutoff = space_.cutoff();
    for (int k = 0; k < space_.n_modes(); ++k) {
        if (jump_left_[k].nonZeros() == 0) continue;
        sparse_times_dense(jump_left_[k], rho, w);
        const Eigen::Index stride = space_.stride(k);
#pragma omp parallel for schedule(static)
        for (Eigen::Index c = 0; c < d; ++c) {
            const int occ = space_.occupation(c, k);
            if (occ >= cutoff) continue;
            out.col(c) += (2.0 * std::sqrt(static_cast<double>(occ + 1))) * w.col(c + stride);
        }
    }
}

CMatrix lindblad_rhs(const QuadraticSystem& sys, const DensityMatrix& rho, const FockSpace& space) {
    require_valid(sys);
    return LindbladKernel(QuadraticGenerator::from_system(sys), space).apply(rho.rho);
}

}  // namespace epm
