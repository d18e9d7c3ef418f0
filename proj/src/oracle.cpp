#include <cmath>
#include <cstdio>

#include "epm/oracle.hpp"

namespace epm {

namespace {

void check_config(const SimConfig& c) {
    if (!(c.dt > 0.0)) fail(ErrorKind::usage, "SimConfig: dt must be positive");
    if (!(c.t_max >= 0.0)) fail(ErrorKind::usage, "SimConfig: t_max must be non-negative");
    if (c.sample_every < 1) fail(ErrorKind::usage, "SimConfig: sample_every must be at least 1");
}

std::string fmt(const char* pattern, double a, double b) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

void check_sample(double t, const DensityMatrix& s, Complex trace0, const FockSpace& space, const SimConfig& c) {
    const double drift = std::abs(s.trace() - trace0);
    if (drift > c.trace_tol) fail(ErrorKind::numerical, fmt("trace drift %.3g at t=%.6g", drift, t));
    const double herm = s.hermiticity_deviation();
    if (herm > c.hermiticity_tol) fail(ErrorKind::numerical, fmt("Hermiticity drift %.3g at t=%.6g", herm, t));
    const double leak = s.boundary_population(space);
    if (leak > c.leakage_tol)
        fail(ErrorKind::numerical, fmt("boundary-layer population %.3g at t=%.6g exceeds the leakage "
                                       "tolerance; increase the Fock cutoff",
                                       leak, t));
    if (c.check_positivity) {
        const double lo = s.min_eigenvalue();
        if (lo < -c.positivity_tol)
            fail(ErrorKind::numerical, fmt("negative density-matrix eigenvalue %.3g at t=%.6g", lo, t));
    }
}

}  // namespace

void integrate_observed(const QuadraticGenerator& gen, const DensityMatrix& rho0, const FockSpace& space,
                        const SimConfig& config, const Observer& observe) {
    check_config(config);
    const auto d = space.dim();
    if (rho0.rho.rows() != d || rho0.rho.cols() != d) fail(ErrorKind::usage, "integrate: initial state dimension mismatch");
    const LindbladKernel kernel(gen, space);

    const long steps = config.t_max > 0.0 ? static_cast<long>(std::ceil(config.t_max / config.dt - 1e-9)) : 0;
    const double h = steps > 0 ? config.t_max / static_cast<double>(steps) : config.dt;
    const Complex trace0 = rho0.trace();

    DensityMatrix state = rho0;
    check_sample(0.0, state, trace0, space, config);
    observe(0.0, state.rho);

    CMatrix k1, k2, k3, k4, tmp;
    for (long s = 1; s <= steps; ++s) {
        const CMatrix& r = state.rho;
        kernel.apply(r, k1);
        tmp = r + (0.5 * h) * k1;
        kernel.apply(tmp, k2);
        tmp = r + (0.5 * h) * k2;
        kernel.apply(tmp, k3);
        tmp = r + h * k3;
        kernel.apply(tmp, k4);
        state.rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (s % config.sample_every == 0 || s == steps) {
            const double t = h * static_cast<double>(s);
            check_sample(t, state, trace0, space, config);
            observe(t, state.rho);
        }
    }
}

Trajectory integrate(const QuadraticSystem& sys, const DensityMatrix& rho0, const FockSpace& space,
                     const SimConfig& config) {
    require_valid(sys);
    Trajectory traj;
    integrate_observed(QuadraticGenerator::from_system(sys), rho0, space, config, [&](double t, const CMatrix& rho) {
        traj.times.push_back(t);
        traj.states.push_back({rho});
    });
    return traj;
}

Complex expectation(const SparseOp& op, const CMatrix& rho) {
    // Tr(rho op) = sum_{r,c} op(r, c) rho(c, r)
    Complex acc{};
    for (Eigen::Index r = 0; r < op.outerSize(); ++r)
        for (SparseOp::InnerIterator it(op, r); it; ++it) acc += it.value() * rho(it.col(), r);
    return acc;
}

CMatrix moment_trajectory(const Trajectory& traj, const std::vector<MomentIndex>& indices, const FockSpace& space) {
    std::vector<SparseOp> ops;
    for (const auto& idx : indices) ops.push_back(space.product(idx));
    CMatrix out(static_cast<Eigen::Index>(traj.states.size()), static_cast<Eigen::Index>(indices.size()));
    for (std::size_t t = 0; t < traj.states.size(); ++t)
        for (std::size_t m = 0; m < ops.size(); ++m) out(t, m) = expectation(ops[m], traj.states[t].rho);
    return out;
}

MomentSamples sample_moments(const QuadraticGenerator& gen, const DensityMatrix& rho0, const FockSpace& space,
                             const SimConfig& config, const std::vector<MomentIndex>& indices) {
    std::vector<SparseOp> ops;
    MomentSamples out;
    for (const auto& idx : indices) {
        ops.push_back(space.product(idx));
        out.labels.push_back(idx.label());
    }
    std::vector<std::vector<Complex>> rows;
    integrate_observed(gen, rho0, space, config, [&](double t, const CMatrix& rho) {
        out.times.push_back(t);
        std::vector<Complex> row;
        for (const auto& op : ops) row.push_back(expectation(op, rho));
        rows.push_back(std::move(row));
    });
    out.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ops.size()));
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t m = 0; m < ops.size(); ++m) out.values(t, m) = rows[t][m];
    return out;
}

VerificationReport verify_moments(const QuadraticGenerator& gen, const DensityMatrix& rho0, const EvolutionMatrix& m,
                                  const FockSpace& space, const SimConfig& config, double tol) {
    if (m.basis.size() != static_cast<std::size_t>(m.dim()))
        fail(ErrorKind::usage, "verify_moments: evolution matrix carries no basis labels");
    VerificationReport rep;
    rep.tol = tol;
    rep.oracle = sample_moments(gen, rho0, space, config, m.basis.entries);
    rep.labels = rep.oracle.labels;
    const CVector v0 = rep.oracle.values.row(0).transpose();
    const auto predicted = propagate_moments(m, v0, rep.oracle.times);
    rep.predicted.resize(rep.oracle.values.rows(), rep.oracle.values.cols());
    for (std::size_t t = 0; t < predicted.size(); ++t) rep.predicted.row(t) = predicted[t].transpose();
    const CMatrix diff = rep.predicted - rep.oracle.values;
    for (Eigen::Index c = 0; c < diff.cols(); ++c) {
        const double dev = diff.col(c).cwiseAbs().maxCoeff();
        rep.per_moment_max_dev.push_back(dev);
        rep.max_dev = std::max(rep.max_dev, dev);
    }
    rep.pass = rep.max_dev <= tol;
    return rep;
}

VerificationReport verify_moments(const QuadraticSystem& sys, const DensityMatrix& rho0, const EvolutionMatrix& m,
                                  const SimConfig& config, double tol) {
    require_valid(sys);
    const FockSpace space(sys.n_modes, config.cutoff);
    return verify_moments(QuadraticGenerator::from_system(sys), rho0, m, space, config, tol);
}

double step_halving_deviation(const QuadraticGenerator& gen, const DensityMatrix& rho0, const FockSpace& space,
                              const SimConfig& config, const std::vector<MomentIndex>& indices) {
    const auto coarse = sample_moments(gen, rho0, space, config, indices);
    SimConfig fine_cfg = config;
    fine_cfg.dt = config.dt / 2.0;
    fine_cfg.sample_every = config.sample_every * 2;
    const auto fine = sample_moments(gen, rho0, space, fine_cfg, indices);
    if (fine.values.rows() != coarse.values.rows())
        fail(ErrorKind::numerical, "step halving: sample grids do not line up");
    return (fine.values - coarse.values).cwiseAbs().maxCoeff();
}

}  // namespace epm
