#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "epm/types.hpp"

namespace epm {

struct Eigensystem {
    CVector values;
    CMatrix vectors;  // unit-norm columns
};

Eigensystem eigen(const CMatrix& m);

/// Eigenvalues sorted by (real, imag); real parts equal to 1e-9 relative count as ties.
std::vector<Complex> sorted_eigenvalues(const CMatrix& m);
void sort_by_real_then_imag(std::vector<Complex>& v);

/// Largest singular value, or 1 for the zero matrix.
double matrix_scale(const CMatrix& m);

/// Singular values above `threshold`.
int numerical_rank(const CMatrix& a, double threshold);

inline constexpr double kRankTol = 1e-9;
inline constexpr double kClusterTol = 1e-7;

struct EigenCluster {
    Complex value;
    std::vector<Complex> members;
    int algebraic_multiplicity = 0;
    int geometric_multiplicity = 0;
};

/// Groups eigenvalues into clusters.
///
/// With an explicit `tol_cluster`, plain single linkage at that radius.
/// Without it, single linkage at kClusterTol * |M| followed by a widening
/// search: a group of m nearby eigenvalues at centroid mu is merged only if
/// (M - mu)^m has an m-dimensional numerical kernel. Perturbed order-k EPs
/// split by ~eps^(1/k), far beyond any fixed radius, so the rank test is what
/// decides.
std::vector<EigenCluster> multiplicities(const CMatrix& m, std::optional<double> tol_cluster = std::nullopt,
                                         double tol_rank = kRankTol);

struct JordanStructure {
    int order = 1;
    std::vector<int> block_sizes;  // descending
    std::vector<int> rank_sequence;  // r_0 = n, r_1, ...
};

/// Jordan block sizes of one cluster from the rank sequence of (M - mu)^k.
JordanStructure ep_order(const CMatrix& m, const EigenCluster& cluster, double tol_rank = kRankTol);

/// Same structure from a list of ranks r_0 = n, r_1, ... (Weyr characteristic).
std::vector<int> blocks_from_ranks(const std::vector<int>& ranks);

struct EPReport {
    std::vector<EigenCluster> clusters;
    std::vector<JordanStructure> jordan;
    double tol_cluster = 0.0;  // 0 when the adaptive search was used
    double tol_rank = kRankTol;

    int max_order() const;
};

EPReport analyze(const CMatrix& m, std::optional<double> tol_cluster = std::nullopt, double tol_rank = kRankTol);

/// -N gamma +/- (N - 2n) sqrt(gamma12^2 - delta^2), principal root.
std::pair<Complex, Complex> closed_form_lambda(int order, int n, double gamma, double gamma12, double delta);

struct SweepRow {
    double param = 0.0;
    std::vector<Complex> eigenvalues;
    std::string error;  // empty on success
};

struct SweepTable {
    std::string parameter;
    std::vector<double> grid;
    std::vector<SweepRow> rows;
};

using MatrixBuilder = std::function<CMatrix(double)>;

/// Default thread count: the OpenMP default, capped by EP_MOMENTS_THREADS if set.
int default_threads();

/// Eigenvalues at every grid point. Points are evaluated concurrently on
/// `threads` threads (1 = serial); rows always come back in grid order.
SweepTable sweep(const std::string& parameter, const MatrixBuilder& builder, const std::vector<double>& grid,
                 int threads = 0);

std::vector<double> linspace(double from, double to, int points);

}  // namespace epm
