#include "epm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include <omp.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace epm {

Eigensystem eigen(const CMatrix& m) {
    if (m.rows() != m.cols()) fail(ErrorKind::usage, "eigen: matrix is not square");
    if (!m.allFinite()) fail(ErrorKind::numerical, "eigen: matrix has non-finite entries");
    Eigen::ComplexEigenSolver<CMatrix> es(m, true);
    if (es.info() != Eigen::Success) fail(ErrorKind::numerical, "eigen: eigensolver did not converge");
    Eigensystem out{es.eigenvalues(), es.eigenvectors()};
    for (Eigen::Index c = 0; c < out.vectors.cols(); ++c) {
        double nrm = out.vectors.col(c).norm();
        if (nrm > 0) out.vectors.col(c) /= nrm;
    }
    return out;
}

namespace {

// Real parts are compared on a grid of 1e-9 relative to the largest modulus,
// so round-off does not scramble eigenvalues with equal real part.
double real_quantum(const std::vector<Complex>& v) {
    double m = 1.0;
    for (auto z : v) m = std::max(m, std::abs(z));
    return 1e-9 * m;
}

bool real_then_imag(Complex a, Complex b, double q) {
    const double ra = std::round(a.real() / q), rb = std::round(b.real() / q);
    if (ra != rb) return ra < rb;
    return a.imag() < b.imag();
}

}  // namespace

void sort_by_real_then_imag(std::vector<Complex>& v) {
    const double q = real_quantum(v);
    std::sort(v.begin(), v.end(), [q](Complex a, Complex b) { return real_then_imag(a, b, q); });
}

std::vector<Complex> sorted_eigenvalues(const CMatrix& m) {
    const auto es = eigen(m);
    std::vector<Complex> v(es.values.data(), es.values.data() + es.values.size());
    sort_by_real_then_imag(v);
    return v;
}

double matrix_scale(const CMatrix& m) {
    if (m.size() == 0) return 1.0;
    Eigen::BDCSVD<CMatrix> svd(m);
    double s = svd.singularValues()(0);
    return s > 0 ? s : 1.0;
}

int numerical_rank(const CMatrix& a, double threshold) {
    if (a.size() == 0) return 0;
    Eigen::BDCSVD<CMatrix> svd(a);
    const auto& sv = svd.singularValues();
    return static_cast<int>((sv.array() > threshold).count());
}

namespace {

struct DisjointSets {
    std::vector<int> parent;
    explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

CMatrix shifted_scaled(const CMatrix& m, Complex mu, double scale) {
    CMatrix b = m;
    b.diagonal().array() -= mu;
    return b / scale;
}

Complex centroid(const std::vector<Complex>& vals) {
    Complex s{};
    for (auto v : vals) s += v;
    return s / static_cast<double>(vals.size());
}

// (M - mu)^size has a kernel of dimension >= size
bool confirms_cluster(const CMatrix& m, Complex mu, int size, double scale, double tol_rank) {
    const CMatrix b = shifted_scaled(m, mu, scale);
    CMatrix p = b;
    for (int k = 1; k < size; ++k) p = p * b;
    return m.rows() - numerical_rank(p, tol_rank) >= size;
}

std::vector<std::vector<int>> groups(DisjointSets& ds, int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> slot(n, -1);
    for (int i = 0; i < n; ++i) {
        int r = ds.find(i);
        if (slot[r] < 0) {
            slot[r] = static_cast<int>(out.size());
            out.emplace_back();
        }
        out[slot[r]].push_back(i);
    }
    return out;
}

}  // namespace

std::vector<EigenCluster> multiplicities(const CMatrix& m, std::optional<double> tol_cluster, double tol_rank) {
    const auto es = eigen(m);
    const int n = static_cast<int>(es.values.size());
    const double scale = matrix_scale(m);
    std::vector<Complex> ev(es.values.data(), es.values.data() + n);

    DisjointSets ds(n);
    auto link_within = [&](DisjointSets& d, double radius) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (std::abs(ev[i] - ev[j]) <= radius) d.unite(i, j);
    };

    if (tol_cluster) {
        link_within(ds, *tol_cluster);
    } else {
        const double r0 = kClusterTol * scale;
        link_within(ds, r0);
        const double step = std::pow(10.0, 0.25);
        for (double r = r0 * step; r <= 0.1 * scale; r *= step) {
            DisjointSets trial = ds;
            link_within(trial, r);
            for (const auto& comp : groups(trial, n)) {
                if (comp.size() < 2) continue;
                bool spans = false;
                for (int i : comp) spans |= ds.find(i) != ds.find(comp.front());
                if (!spans) continue;
                std::vector<Complex> vals;
                for (int i : comp) vals.push_back(ev[i]);
                if (confirms_cluster(m, centroid(vals), static_cast<int>(comp.size()), scale, tol_rank))
                    for (int i : comp) ds.unite(i, comp.front());
            }
        }
    }

    std::vector<EigenCluster> out;
    for (const auto& g : groups(ds, n)) {
        EigenCluster c;
        for (int i : g) c.members.push_back(ev[i]);
        sort_by_real_then_imag(c.members);
        c.value = centroid(c.members);
        c.algebraic_multiplicity = static_cast<int>(g.size());
        int geo = n - numerical_rank(shifted_scaled(m, c.value, scale), tol_rank);
        c.geometric_multiplicity = std::clamp(geo, 1, c.algebraic_multiplicity);
        out.push_back(std::move(c));
    }
    std::vector<Complex> values;
    for (const auto& c : out) values.push_back(c.value);
    const double q = real_quantum(values);
    std::sort(out.begin(), out.end(),
              [q](const EigenCluster& a, const EigenCluster& b) { return real_then_imag(a.value, b.value, q); });
    return out;
}

std::vector<int> blocks_from_ranks(const std::vector<int>& ranks) {
    // w_k = r_{k-1} - r_k counts blocks of size >= k
    std::vector<int> w;
    for (std::size_t k = 1; k < ranks.size(); ++k) {
        int d = ranks[k - 1] - ranks[k];
        if (d < 0)
            fail(ErrorKind::numerical, "rank sequence increases at k=" + std::to_string(k));
        if (!w.empty() && d > w.back())
            fail(ErrorKind::numerical, "Weyr characteristic increases at k=" + std::to_string(k));
        w.push_back(d);
    }
    while (!w.empty() && w.back() == 0) w.pop_back();
    std::vector<int> blocks;
    for (std::size_t k = w.size(); k >= 1; --k) {
        int next = k < w.size() ? w[k] : 0;
        for (int c = 0; c < w[k - 1] - next; ++c) blocks.push_back(static_cast<int>(k));
    }
    return blocks;
}

JordanStructure ep_order(const CMatrix& m, const EigenCluster& cluster, double tol_rank) {
    const int n = static_cast<int>(m.rows());
    const int alg = cluster.algebraic_multiplicity;
    const int target = n - alg;
    const CMatrix b = shifted_scaled(m, cluster.value, matrix_scale(m));
    JordanStructure js;
    js.rank_sequence.push_back(n);
    CMatrix p = CMatrix::Identity(n, n);
    for (int k = 1; k <= alg; ++k) {
        p = p * b;
        int r = numerical_rank(p, tol_rank);
        if (r > js.rank_sequence.back())
            fail(ErrorKind::numerical, "rank sequence non-monotone at k=" + std::to_string(k));
        js.rank_sequence.push_back(r);
        if (r < target)
            fail(ErrorKind::numerical, "kernel of (M - mu)^" + std::to_string(k) +
                                           " exceeds the algebraic multiplicity; cluster tolerance too small");
        if (r == target) break;
    }
    if (js.rank_sequence.back() != target)
        fail(ErrorKind::numerical, "rank sequence did not reach n - algebraic multiplicity");
    js.block_sizes = blocks_from_ranks(js.rank_sequence);
    js.order = js.block_sizes.empty() ? 1 : js.block_sizes.front();
    return js;
}

int EPReport::max_order() const {
    int o = 0;
    for (const auto& j : jordan) o = std::max(o, j.order);
    return o;
}

EPReport analyze(const CMatrix& m, std::optional<double> tol_cluster, double tol_rank) {
    EPReport rep;
    rep.clusters = multiplicities(m, tol_cluster, tol_rank);
    rep.tol_cluster = tol_cluster.value_or(0.0);
    rep.tol_rank = tol_rank;
    for (const auto& c : rep.clusters) rep.jordan.push_back(ep_order(m, c, tol_rank));
    return rep;
}

std::pair<Complex, Complex> closed_form_lambda(int order, int n, double gamma, double gamma12, double delta) {
    if (n < 0 || n > order) fail(ErrorKind::usage, "closed_form_lambda: n must lie in [0, N]");
    const Complex root = std::sqrt(Complex(gamma12 * gamma12 - delta * delta, 0.0));
    const Complex base(-order * gamma, 0.0);
    const double w = order - 2 * n;
    return {base + w * root, base - w * root};
}

int default_threads() {
    if (const char* env = std::getenv("EP_MOMENTS_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return std::min(v, std::max(1, omp_get_max_threads()));
    }
    return std::max(1, omp_get_max_threads());
}

SweepTable sweep(const std::string& parameter, const MatrixBuilder& builder, const std::vector<double>& grid,
                 int threads) {
    if (grid.empty()) fail(ErrorKind::usage, "sweep: empty grid");
    for (double g : grid)
        if (!std::isfinite(g)) fail(ErrorKind::usage, "sweep: non-finite grid value");
    SweepTable table;
    table.parameter = parameter;
    table.grid = grid;
    table.rows.resize(grid.size());
    const int nthreads = threads > 0 ? threads : default_threads();
    const auto npts = static_cast<long>(grid.size());

#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
    for (long i = 0; i < npts; ++i) {
        SweepRow& row = table.rows[i];
        row.param = grid[i];
        try {
            row.eigenvalues = sorted_eigenvalues(builder(grid[i]));
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    }
    return table;
}

std::vector<double> linspace(double from, double to, int points) {
    if (points < 1) fail(ErrorKind::usage, "linspace: need at least one point");
    std::vector<double> out(points);
    if (points == 1) {
        out[0] = from;
        return out;
    }
    for (int i = 0; i < points; ++i) out[i] = from + (to - from) * i / (points - 1);
    out.back() = to;
    return out;
}

}  // namespace epm
