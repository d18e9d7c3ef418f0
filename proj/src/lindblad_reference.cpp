#include "epm/oracle.hpp"

namespace epm {

CMatrix lindblad_rhs_reference(const QuadraticGenerator& gen, const CMatrix& rho, const FockSpace& space) {
    const int n = gen.n_modes;
    const auto d = space.dim();
    if (rho.rows() != d || rho.cols() != d) fail(ErrorKind::usage, "reference rhs: dimension mismatch");
    std::vector<CMatrix> a, ad;
    for (int j = 0; j < n; ++j) {
        a.emplace_back(CMatrix(space.annihilation(j)));
        ad.push_back(a.back().adjoint());
    }
    CMatrix h = CMatrix::Zero(d, d);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            h += gen.hop(j, k) * ad[j] * a[k] + gen.create(j, k) * ad[j] * ad[k] + gen.annihilate(j, k) * a[j] * a[k];

    CMatrix out = -kI * (h * rho - rho * h.adjoint());
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) out += 2.0 * gen.jump(j, k) * a[j] * rho * ad[k];
    return out;
}

}  // namespace epm
