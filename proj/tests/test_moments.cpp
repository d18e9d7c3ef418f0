#include <doctest.h>

#include <random>

#include "epm/moments.hpp"
#include "epm/spectral.hpp"
#include "epm/symbolic.hpp"
#include "support/random.hpp"

using namespace epm;

namespace {

double max_abs(const CMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

EvolutionMatrix bare(const CMatrix& m, const std::vector<std::string>& labels) {
    EvolutionMatrix e;
    e.matrix = m;
    for (const auto& l : labels) e.basis.entries.push_back(MomentIndex::parse(l));
    e.n_modes = 2;
    return e;
}

// Second-order matrix over [a1 a1, a1 a2, a2 a1, a2 a2] written out by hand.
CMatrix second_order_full(double delta, double gamma, double g12) {
    const Complex p(-gamma, -delta), q(-g12, 0), r(-gamma, delta);
    CMatrix m(4, 4);
    m << 2.0 * p, q, q, 0,  //
        q, p + r, 0, q,     //
        q, 0, p + r, q,     //
        0, q, q, 2.0 * r;
    return m;
}

CMatrix second_order_reduced(double delta, double gamma, double g12) {
    CMatrix m(3, 3);
    m << Complex(-2 * gamma, -2 * delta), -2 * g12, 0,  //
        -g12, -2 * gamma, -g12,                          //
        0, -2 * g12, Complex(-2 * gamma, 2 * delta);
    return m;
}

CMatrix third_order_reduced(double delta, double gamma, double g12) {
    CMatrix m(4, 4);
    m << Complex(-3 * gamma, -3 * delta), -3 * g12, 0, 0,  //
        -g12, Complex(-3 * gamma, -delta), -2 * g12, 0,     //
        0, -2 * g12, Complex(-3 * gamma, delta), -g12,      //
        0, 0, -3 * g12, Complex(-3 * gamma, 3 * delta);
    return m;
}

}  // namespace

TEST_CASE("moment labels") {
    const auto m = MomentIndex::parse("a1† a2 a1");
    REQUIRE(m.order() == 3);
    CHECK(m.factors()[0] == Ladder{1, true});
    CHECK(m.factors()[1] == Ladder{2, false});
    CHECK(m.label() == "a1† a2 a1");
    CHECK(MomentIndex::parse(m.label()) == m);
    CHECK(MomentIndex::parse("a1' a2") == MomentIndex::parse("a1† a2"));
    CHECK(m.max_mode() == 2);
    CHECK_THROWS_AS(MomentIndex::parse("b1"), Error);
    CHECK_THROWS_AS(MomentIndex::parse("a"), Error);
    CHECK_THROWS_AS(MomentIndex::parse("a1a2"), Error);
    CHECK_THROWS_AS(MomentIndex::parse(""), Error);
    CHECK_THROWS_AS(MomentIndex::parse("a0"), Error);
}

TEST_CASE("canonical key sorts modes stably") {
    CHECK(MomentIndex::parse("a2 a1").canonical_key() == MomentIndex::parse("a1 a2"));
    CHECK(MomentIndex::parse("a2 a1 a1†").canonical_key() == MomentIndex::parse("a1 a1† a2"));
    CHECK(MomentIndex::parse("a1† a1").canonical_key() == MomentIndex::parse("a1† a1"));
    CHECK_FALSE(MomentIndex::parse("a1 a1†").canonical_key() == MomentIndex::parse("a1† a1").canonical_key());
}

TEST_CASE("normal ordering") {
    const auto a = NormalPoly::ladder(1, 0, false);
    const auto ad = NormalPoly::ladder(1, 0, true);
    const auto aad = a * ad;  // a a^+ = a^+ a + 1
    CHECK(aad.terms().size() == 2);
    CHECK(aad.terms().at(Monomial{{0, 0}}) == Complex(1));
    CHECK(aad.terms().at(Monomial{{1, 1}}) == Complex(1));
    const auto a2ad2 = a * a * ad * ad;  // a^2 a^+2 = a^+2 a^2 + 4 a^+ a + 2
    CHECK(a2ad2.terms().at(Monomial{{2, 2}}) == Complex(1));
    CHECK(a2ad2.terms().at(Monomial{{1, 1}}) == Complex(4));
    CHECK(a2ad2.terms().at(Monomial{{0, 0}}) == Complex(2));
    const auto b = NormalPoly::ladder(2, 1, false);
    const auto ad1 = NormalPoly::ladder(2, 0, true);
    const auto comm = b * ad1 - ad1 * b;
    auto c = comm;
    c.prune(0.0);
    CHECK(c.terms().empty());
}

TEST_CASE("adjoint generator on a damped single mode") {
    auto sys = QuadraticSystem::zeros(1);
    sys.detunings(0) = 0.5;
    sys.decoherence(0, 0) = 0.3;
    const auto gen = QuadraticGenerator::from_system(sys);
    auto da = gen.adjoint(NormalPoly::ladder(1, 0, false));
    da.prune(1e-15);
    REQUIRE(da.terms().size() == 1);
    CHECK(std::abs(da.terms().at(Monomial{{0, 1}}) - Complex(-0.3, -0.5)) < 1e-15);
    // number operator decays at twice the amplitude rate
    auto dn = gen.adjoint(NormalPoly::ladder(1, 0, true) * NormalPoly::ladder(1, 0, false));
    dn.prune(1e-15);
    REQUIRE(dn.terms().size() == 1);
    CHECK(std::abs(dn.terms().at(Monomial{{1, 1}}) - Complex(-0.6)) < 1e-15);
    // the identity is conserved
    auto d1 = gen.adjoint(NormalPoly::identity(1));
    d1.prune(1e-15);
    CHECK(d1.terms().empty());
}

TEST_CASE("first-moment matrix of the two-mode anti-PT model") {
    const auto m = first_moment_matrix(QuadraticSystem::anti_pt_bimodal(1.0, 1.0, 0.8), false);
    CMatrix expect(2, 2);
    expect << Complex(-1, -1), -0.8, -0.8, Complex(-1, 1);
    CHECK(max_abs(m.matrix - expect) <= 1e-12);
    CHECK(m.basis.labels() == std::vector<std::string>{"a1", "a2"});
}

TEST_CASE("first-moment matrix closed form for U(1) loss systems") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const auto sys = test::random_loss_system(rng, 1 + trial % 4);
        const auto m = first_moment_matrix(sys, false);
        CMatrix expect = -kI * sys.coherent - sys.decoherence;
        expect.diagonal() += -kI * sys.detunings.cast<Complex>();
        CHECK(max_abs(m.matrix - expect) <= 1e-12);
    }
}

TEST_CASE("first-moment matrix trivial and squeezed cases") {
    const auto zero = first_moment_matrix(QuadraticSystem::zeros(1), false);
    CHECK(zero.matrix.rows() == 1);
    CHECK(zero.matrix(0, 0) == Complex(0));

    auto sq = QuadraticSystem::zeros(1);
    sq.squeezing(0, 0) = 0.3;
    CHECK_THROWS_AS(first_moment_matrix(sq, false), Error);
    const auto m = first_moment_matrix(sq, true);
    CHECK(m.basis.labels() == std::vector<std::string>{"a1", "a1†"});
    CMatrix expect(2, 2);
    expect << 0, Complex(0, -0.3), Complex(0, 0.3), 0;
    CHECK(max_abs(m.matrix - expect) <= 1e-12);

    auto gain = QuadraticSystem::anti_pt_bimodal(1.0, 1.0, 2.0);
    CHECK_THROWS_AS(first_moment_matrix(gain, false), Error);
}

TEST_CASE("interleaved U(1) matrix is block diagonal with conjugate blocks") {
    const auto sys = QuadraticSystem::anti_pt_bimodal(1.0, 1.0, 0.8);
    const auto a = first_moment_matrix(sys, false).matrix;
    const auto m = first_moment_matrix(sys, true).matrix;
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
            CHECK(std::abs(m(2 * j, 2 * k) - a(j, k)) <= 1e-12);
            CHECK(std::abs(m(2 * j + 1, 2 * k + 1) - std::conj(a(j, k))) <= 1e-12);
            CHECK(std::abs(m(2 * j, 2 * k + 1)) <= 1e-12);
        }
}

TEST_CASE("Kronecker sum reproduces the second-order matrix") {
    const auto sys = QuadraticSystem::anti_pt_bimodal(1.0, 1.0, 0.8);
    const auto a = first_moment_matrix(sys, false);
    const auto b = kronecker_sum(a, a);
    CHECK(max_abs(b.matrix - second_order_full(1.0, 1.0, 0.8)) <= 1e-12);
    CHECK(b.basis.labels() == std::vector<std::string>{"a1 a1", "a1 a2", "a2 a1", "a2 a2"});
    const CMatrix id = CMatrix::Identity(2, 2);
    CHECK(max_abs(b.matrix - (kron(a.matrix, id) + kron(id, a.matrix))) <= 1e-15);
}

TEST_CASE("Kronecker sum of 1x1 blocks adds") {
    const auto s = kronecker_sum(bare(CMatrix::Constant(1, 1, Complex(1, 2)), {"a1"}),
                                 bare(CMatrix::Constant(1, 1, Complex(-3, 0.5)), {"a2"}));
    CHECK(s.matrix(0, 0) == Complex(-2, 2.5));
    CHECK(s.basis.labels() == std::vector<std::string>{"a1 a2"});
}

TEST_CASE("Kronecker sum refuses different systems") {
    const auto a = first_moment_matrix(QuadraticSystem::anti_pt_bimodal(1.0, 1.0, 0.8), false);
    const auto b = first_moment_matrix(QuadraticSystem::anti_pt_bimodal(1.0, 1.0, 0.5), false);
    CHECK_THROWS_AS(kronecker_sum(a, b), Error);
    const auto c = first_moment_matrix(QuadraticSystem::zeros(3), false);
    CHECK_THROWS_AS(kronecker_sum(a, c), Error);
}

TEST_CASE("moment_power") {
    const auto a = first_moment_matrix(QuadraticSystem::anti_pt_bimodal(1.0, 1.0, 0.8), false);
    CHECK(moment_power(a, 1).matrix == a.matrix);
    CHECK(moment_power(a, 2).matrix == kronecker_sum(a, a).matrix);
    CHECK(moment_power(a, 3).matrix.rows() == 8);
    CHECK_THROWS_AS(moment_power(a, 0), Error);
}

TEST_CASE("reduce yields the reduced second- and third-order matrices") {
    for (double g12 : {0.0, 0.5, 0.8, 1.0, 1.7}) {
        const auto a = first_moment_matrix(QuadraticSystem::anti_pt_bimodal(1.0, 2.0, g12), false);
        const auto r2 = reduce(moment_power(a, 2));
        CHECK(r2.basis.labels() == std::vector<std::string>{"a1 a1", "a1 a2", "a2 a2"});
        CHECK(r2.basis.kind == BasisKind::reduced);
        CHECK(max_abs(r2.matrix - second_order_reduced(1.0, 2.0, g12)) <= 1e-12);
        const auto r3 = reduce(moment_power(a, 3));
        CHECK(r3.basis.labels() == std::vector<std::string>{"a1 a1 a1", "a1 a1 a2", "a1 a2 a2", "a2 a2 a2"});
        CHECK(max_abs(r3.matrix - third_order_reduced(1.0, 2.0, g12)) <= 1e-12);
    }
}

TEST_CASE("reduce leaves distinct bases alone and flags non-closure") {
    std::mt19937_64 rng(2);
    const auto m = bare(test::random_matrix(rng, 2, 2), {"a1", "a2"});
    const auto r = reduce(m);
    CHECK(r.matrix == m.matrix);
    CHECK(r.basis.labels() == m.basis.labels());

    CMatrix bad(2, 2);
    bad << 1, 0, 0, 2;
    CHECK_THROWS_AS(reduce(bare(bad, {"a1 a2", "a2 a1"})), Error);
}

TEST_CASE("reduced dimension is m + 1 for two-mode annihilation products") {
    const auto a = first_moment_matrix(QuadraticSystem::anti_pt_bimodal(0.3, 1.0, 0.4), false);
    for (int m = 1; m <= 6; ++m) CHECK(reduce(moment_power(a, m)).dim() == m + 1);
}

TEST_CASE("reduced spectrum is contained in the full spectrum") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const auto sys = test::random_loss_system(rng, 2 + trial % 2);
        const auto a = first_moment_matrix(sys, false);
        for (int m = 2; m <= 3; ++m) {
            const auto full = moment_power(a, m);
            const auto red = reduce(full);
            const auto ef = sorted_eigenvalues(full.matrix);
            for (auto z : sorted_eigenvalues(red.matrix)) {
                double best = 1e300;
                for (auto w : ef) best = std::min(best, std::abs(z - w));
                CHECK(best <= 1e-8);
            }
        }
    }
}

TEST_CASE("direct adjoint construction agrees with the Kronecker pipeline") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const auto sys = test::random_loss_system(rng, 2 + trial % 2);
        const auto full = moment_power(first_moment_matrix(sys, false), 2);
        CHECK(kronecker_exact(sys, full.basis));
        // a1 a2 and a2 a1 are the same operator, so only the reduced matrices are unique
        const auto direct = moment_matrix_direct(sys, full.basis);
        CHECK(max_abs(reduce(direct).matrix - reduce(full).matrix) <= 1e-12);
    }
}

TEST_CASE("Kronecker composition is not exact for anti-normal products") {
    const auto sys = QuadraticSystem::anti_pt_bimodal(1.0, 1.0, 0.8);
    MomentBasis b;
    for (const char* l : {"a1 a1†", "a1 a2†", "a2 a1†", "a2 a2†"}) b.entries.push_back(MomentIndex::parse(l));
    CHECK_FALSE(kronecker_exact(sys, b));
    // a a^+ = a^+ a + 1 picks up a constant, so it cannot close on this basis
    CHECK_THROWS_AS(moment_matrix_direct(sys, b), Error);
    MomentBasis normal;
    for (const char* l : {"a1† a1", "a1† a2", "a2† a1", "a2† a2"}) normal.entries.push_back(MomentIndex::parse(l));
    CHECK(kronecker_exact(sys, normal));
    CHECK_NOTHROW(moment_matrix_direct(sys, normal));
}

TEST_CASE("Kronecker sums keep symmetric matrices symmetric") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const int na = 1 + trial % 4, nb = 1 + (trial / 4) % 3;
        CMatrix a = test::random_matrix(rng, na, na), b = test::random_matrix(rng, nb, nb);
        a = (a + a.transpose()).eval();
        b = (b + b.transpose()).eval();
        std::vector<std::string> la, lb;
        for (int i = 0; i < na; ++i) la.push_back("a" + std::to_string(i + 1));
        for (int i = 0; i < nb; ++i) lb.push_back("a" + std::to_string(i + 1));
        const auto s = kronecker_sum(bare(a, la), bare(b, lb)).matrix;
        CHECK(max_abs(s - s.transpose()) == 0.0);
    }
}

TEST_CASE("propagate_moments") {
    const auto decay = propagate_moments(CMatrix::Constant(1, 1, -1.0), CVector::Ones(1), {1.0});
    CHECK(std::abs(decay[0](0) - std::exp(-1.0)) <= 1e-15);

    const auto a = first_moment_matrix(QuadraticSystem::anti_pt_bimodal(1.0, 1.0, 0.0), false);
    CVector v0(2);
    v0 << 0.6, Complex(0, 0.3);
    const std::vector<double> ts{0.0, 0.5, 1.7, 3.0};
    const auto traj = propagate_moments(a, v0, ts);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        CHECK(std::abs(traj[i](0) - v0(0) * std::exp(Complex(-1, -1) * ts[i])) <= 1e-13);
        CHECK(std::abs(traj[i](1) - v0(1) * std::exp(Complex(-1, 1) * ts[i])) <= 1e-13);
    }
    CHECK_THROWS_AS(propagate_moments(a, CVector::Ones(3), {1.0}), Error);
    CHECK_THROWS_AS(propagate_moments(a, v0, {1.0, 0.5}), Error);
    CHECK_THROWS_AS(propagate_moments(a, v0, {-1.0}), Error);
}

TEST_CASE("propagator semigroup property") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 1 + trial % 8;
        const CMatrix m = test::random_matrix(rng, n, n);
        const CVector v0 = test::random_matrix(rng, n, 1);
        const double t1 = u(rng), t2 = u(rng);
        const auto direct = propagate_moments(m, v0, {t1 + t2})[0];
        const auto half = propagate_moments(m, v0, {t1})[0];
        const auto chained = propagate_moments(m, half, {t2})[0];
        CHECK((direct - chained).norm() <= 1e-10 * std::max(1.0, direct.norm()));
    }
}
