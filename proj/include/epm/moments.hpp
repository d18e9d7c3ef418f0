#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "epm/model.hpp"
#include "epm/symbolic.hpp"
#include "epm/types.hpp"

namespace epm {

/// One ladder operator inside a moment label; mode is 1-based.
struct Ladder {
    int mode = 1;
    bool dagger = false;

    friend bool operator==(const Ladder&, const Ladder&) = default;
    friend auto operator<=>(const Ladder&, const Ladder&) = default;
};

/// Ordered operator product such as `a1 a2†`. Factor order is kept verbatim.
class MomentIndex {
public:
    MomentIndex() = default;
    explicit MomentIndex(std::vector<Ladder> factors);

    /// Grammar: factors separated by whitespace, each `a<mode>` with an
    /// optional `†` (or ASCII `'`) suffix, e.g. "a1† a1 a2".
    static MomentIndex parse(std::string_view label);

    const std::vector<Ladder>& factors() const { return factors_; }
    std::size_t order() const { return factors_.size(); }
    int max_mode() const;

    /// Stable sort by mode: distinct modes commute, same-mode order is kept.
    MomentIndex canonical_key() const;
    std::string label() const;

    /// Factors of *this followed by factors of `tail`.
    MomentIndex concat(const MomentIndex& tail) const;

    /// Operator product in normal order (0-based modes inside the polynomial).
    NormalPoly to_poly(int n_modes) const;

    friend bool operator==(const MomentIndex&, const MomentIndex&) = default;
    friend auto operator<=>(const MomentIndex&, const MomentIndex&) = default;

private:
    std::vector<Ladder> factors_;
};

enum class BasisKind { full, reduced };

struct MomentBasis {
    std::vector<MomentIndex> entries;
    BasisKind kind = BasisKind::full;

    std::size_t size() const { return entries.size(); }
    std::vector<std::string> labels() const;

    /// [a1, ..., an]
    static MomentBasis annihilation(int n_modes);
    /// [a1, a1†, ..., an, an†]
    static MomentBasis interleaved(int n_modes);
};

/// Evolution matrix M with d<v>/dt = M <v> over the moments in `basis`.
/// `n_modes` and `origin` identify the underlying system; origin 0 means unknown.
struct EvolutionMatrix {
    CMatrix matrix;
    MomentBasis basis;
    int n_modes = 0;
    std::uint64_t origin = 0;

    Eigen::Index dim() const { return matrix.rows(); }
};

/// Fingerprint of a system, used to refuse mixing matrices of different systems.
std::uint64_t system_fingerprint(const QuadraticSystem& sys);

/// First-moment matrix. Non-interleaved uses [a1..an] (U(1) only);
/// interleaved uses [a1, a1†, ..., an, an†].
EvolutionMatrix first_moment_matrix(const QuadraticSystem& sys, bool interleaved);

/// Exact linear generator of the given moments obtained from the adjoint
/// master equation, without validation. Throws Error(numerical) if the
/// derivative of some entry leaves the span of the basis (closure violation).
/// When entries coincide as operators (a1 a2 and a2 a1) the coefficients are
/// not unique and the minimum-norm split is returned; reduce() makes it unique.
CMatrix adjoint_moment_generator(const QuadraticGenerator& gen, const MomentBasis& basis);

/// Validated wrapper around adjoint_moment_generator for a system.
EvolutionMatrix moment_matrix_direct(const QuadraticSystem& sys, const MomentBasis& basis);

/// Ma (+) Mb = Ma x I + I x Mb over the basis {alpha_i beta_j} in lexicographic order.
EvolutionMatrix kronecker_sum(const EvolutionMatrix& a, const EvolutionMatrix& b);

/// m-fold recursive Kronecker sum.
EvolutionMatrix moment_power(const EvolutionMatrix& first, int m);

/// Collapse moments equal up to commutation of distinct modes.
EvolutionMatrix reduce(const EvolutionMatrix& full, double consistency_tol = 1e-12);

/// True when the Kronecker-sum composition of `basis` is exact for `sys`:
/// the jump term contributes a cross term 2 G [a^+, X][Y, a] whenever an
/// annihilation factor precedes a creation factor of a dissipatively
/// coupled mode; such products pick up inhomogeneous source terms.
bool kronecker_exact(const QuadraticSystem& sys, const MomentBasis& basis);

/// exp(M t) v0 for every t.
std::vector<CVector> propagate_moments(const EvolutionMatrix& m, const CVector& v0,
                                       const std::vector<double>& times);
std::vector<CVector> propagate_moments(const CMatrix& m, const CVector& v0,
                                       const std::vector<double>& times);

}  // namespace epm
