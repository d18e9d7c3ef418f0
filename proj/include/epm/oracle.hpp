#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "epm/model.hpp"
#include "epm/moments.hpp"
#include "epm/symbolic.hpp"
#include "epm/types.hpp"

namespace epm {

using SparseOp = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

inline constexpr int kMaxFockDim = 4096;

/// Truncated Fock space of n modes with occupations 0..cutoff per mode.
/// State index = sum_j n_j (cutoff+1)^(n-1-j), so mode 1 is the most
/// significant digit and a_1 = a (x) I (x) ... (x) I.
class FockSpace {
public:
    FockSpace(int n_modes, int cutoff);

    int n_modes() const { return n_modes_; }
    int cutoff() const { return cutoff_; }
    Eigen::Index dim() const { return dim_; }
    Eigen::Index stride(int mode) const { return strides_[mode]; }  // 0-based mode
    int occupation(Eigen::Index state, int mode) const {
        return static_cast<int>((state / strides_[mode]) % (cutoff_ + 1));
    }
    bool on_boundary(Eigen::Index state) const;

    const SparseOp& annihilation(int mode) const { return ops_[mode]; }  // 0-based mode
    SparseOp creation(int mode) const { return SparseOp(ops_[mode].adjoint()); }

    /// Operator product in the stored factor order.
    SparseOp product(const MomentIndex& index) const;

private:
    int n_modes_;
    int cutoff_;
    Eigen::Index dim_;
    std::vector<Eigen::Index> strides_;
    std::vector<SparseOp> ops_;
};

FockSpace build_space(int n_modes, int cutoff);

struct DensityMatrix {
    CMatrix rho;

    Complex trace() const { return rho.trace(); }
    double hermiticity_deviation() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
    double min_eigenvalue() const;
    double boundary_population(const FockSpace& space) const;
};

/// Product of truncated, renormalized single-mode coherent states.
DensityMatrix coherent_state(const std::vector<Complex>& alphas, const FockSpace& space);

struct SimConfig {
    double dt = 1e-3;
    double t_max = 0.0;
    double leakage_tol = 1e-8;
    int cutoff = 8;
    int sample_every = 1;       // RK4 steps between samples
    bool check_positivity = true;
    double trace_tol = 1e-8;
    double hermiticity_tol = 1e-10;
    double positivity_tol = 1e-8;
};

/// Master-equation right-hand side on a truncated space, parallelized over
/// density-matrix columns. Assumes a Hermitian rho and a Hermitian jump
/// matrix (then rho H^+ = (H rho)^+).
class LindbladKernel {
public:
    LindbladKernel(const QuadraticGenerator& gen, const FockSpace& space);

    void apply(const CMatrix& rho, CMatrix& out) const;
    CMatrix apply(const CMatrix& rho) const {
        CMatrix out;
        apply(rho, out);
        return out;
    }

private:
    FockSpace space_;
    SparseOp h_;
    std::vector<SparseOp> jump_left_;  // B_k = sum_j jump_jk a_j
};

/// Dense serial evaluation of the same right-hand side, straight from the
/// definition. Reference for the parallel kernel.
CMatrix lindblad_rhs_reference(const QuadraticGenerator& gen, const CMatrix& rho, const FockSpace& space);

/// -i(H rho - rho H^+) + 2 sum_jk G_jk a_k rho a_j^+ for a validated system.
CMatrix lindblad_rhs(const QuadraticSystem& sys, const DensityMatrix& rho, const FockSpace& space);

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
};

using Observer = std::function<void(double t, const CMatrix& rho)>;

/// Fixed-step RK4; invariants are checked at every sample.
void integrate_observed(const QuadraticGenerator& gen, const DensityMatrix& rho0, const FockSpace& space,
                        const SimConfig& config, const Observer& observe);

Trajectory integrate(const QuadraticSystem& sys, const DensityMatrix& rho0, const FockSpace& space,
                     const SimConfig& config);

Complex expectation(const SparseOp& op, const CMatrix& rho);

/// Rows: samples, columns: moments, entry Tr(rho(t) prod factors).
CMatrix moment_trajectory(const Trajectory& traj, const std::vector<MomentIndex>& indices, const FockSpace& space);

struct MomentSamples {
    std::vector<double> times;
    std::vector<std::string> labels;
    CMatrix values;  // times x moments
};

MomentSamples sample_moments(const QuadraticGenerator& gen, const DensityMatrix& rho0, const FockSpace& space,
                             const SimConfig& config, const std::vector<MomentIndex>& indices);

struct VerificationReport {
    std::vector<std::string> labels;
    std::vector<double> per_moment_max_dev;
    double max_dev = 0.0;
    double tol = 0.0;
    bool pass = false;
    MomentSamples oracle;
    CMatrix predicted;  // times x moments
};

/// Integrates rho0 and compares its moments against exp(M t) v0.
VerificationReport verify_moments(const QuadraticSystem& sys, const DensityMatrix& rho0, const EvolutionMatrix& m,
                                  const SimConfig& config, double tol);

/// Same comparison for a generator that need not come from a validated system.
VerificationReport verify_moments(const QuadraticGenerator& gen, const DensityMatrix& rho0, const EvolutionMatrix& m,
                                  const FockSpace& space, const SimConfig& config, double tol);

/// Largest change of the sampled moments when dt is halved.
double step_halving_deviation(const QuadraticGenerator& gen, const DensityMatrix& rho0, const FockSpace& space,
                              const SimConfig& config, const std::vector<MomentIndex>& indices);

}  // namespace epm
