#include <doctest.h>

#include <random>

#include "mvldp/errors.hpp"
#include "mvldp/triple.hpp"
#include "support.hpp"

using namespace mvldp;
using mvldp::test::linear;
using mvldp::test::pde;

TEST_SUITE("triple") {

TEST_CASE("linear model is Euclidean in 1D") {
    const DiscretizedTriple t(linear(1.0, 0.0, 0.5, 1.0));
    CHECK(t.h_gram().rows() == 1);
    CHECK(t.h_gram()(0, 0) == 1.0);
    CHECK(t.alpha() == 2.0);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 3.0);
    for (Space s : {Space::H, Space::V, Space::V_star}) CHECK(norm(t, s, x) == doctest::Approx(3.0).epsilon(1e-12));
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, -2.0);
    CHECK(pairing(t, u, x) == doctest::Approx(-6.0));
}

TEST_CASE("porous Gram is h times the inverse Dirichlet Laplacian") {
    ModelConfig m = pde(ModelKind::porous_media, 3, 3.0);
    m.h = 0.25;
    const DiscretizedTriple t(m);
    // inverse of tridiag(-1,2,-1) for n = 3, written out by hand
    Eigen::Matrix3d inv;
    inv << 3, 2, 1, 2, 4, 2, 1, 2, 3;
    inv /= 4.0;
    const Eigen::Matrix3d expected = 0.25 * 0.25 * 0.25 * inv;  // h · (h² · inv)
    CHECK((t.h_gram() - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((t.h_gram() - t.h_gram().transpose()).norm() == 0.0);
    CHECK(Eigen::LLT<Eigen::MatrixXd>(t.h_gram()).info() == Eigen::Success);
    CHECK(t.alpha() == 3.0);
}

TEST_CASE("mesh must match the node count") {
    ModelConfig m = pde(ModelKind::p_laplace, 3, 2.0);
    m.h = 0.3;
    CHECK_THROWS_AS(DiscretizedTriple{m}, ValidationError);
    m.h = 0.0;
    CHECK(DiscretizedTriple(m).mesh() == doctest::Approx(0.25));
    m.exponent = 1.5;
    CHECK_THROWS_WITH_AS(DiscretizedTriple{m}, doctest::Contains("exponent"), ValidationError);
}

TEST_CASE("p = 2 Laplace V norm is the discrete H1_0 seminorm") {
    ModelConfig m = pde(ModelKind::p_laplace, 3, 2.0);
    m.h = 0.25;
    const DiscretizedTriple t(m);
    Eigen::VectorXd x(3);
    x << 0, 1, 0;
    // forward differences with zero boundary values: 0, 4, -4, 0
    CHECK(norm(t, Space::V, x) == doctest::Approx(std::sqrt((16.0 + 16.0) * 0.25)).epsilon(1e-14));
    CHECK(norm(t, Space::H, x) == doctest::Approx(std::sqrt(0.25)).epsilon(1e-14));
    CHECK(t.alpha() == 2.0);
}

TEST_CASE("drift examples") {
    const EmpiricalMeasure d0 = EmpiricalMeasure::dirac(Eigen::VectorXd::Zero(1));
    {
        const DiscretizedTriple t(linear(1.0, 0.0, 0.5, 1.0));
        CHECK(drift_A(t, 0.0, Eigen::VectorXd::Constant(1, 2.0), d0)[0] == -2.0);
    }
    {
        ModelConfig m = pde(ModelKind::p_laplace, 3, 2.0, 0.7);
        const DiscretizedTriple t(m);
        const EmpiricalMeasure mu(3, {1, 2, 3, 3, 2, 1}, {0.5, 0.5});
        const auto a = drift_A(t, 0.0, Eigen::VectorXd::Zero(3), mu);
        CHECK((a - 0.7 * Eigen::Vector3d(2, 2, 2)).norm() < 1e-14);
    }
    {
        ModelConfig m = pde(ModelKind::porous_media, 3, 3.0);
        const DiscretizedTriple t(m);
        Eigen::Vector3d x(1, 0, -1);
        // Ψ(x) = x|x| = (1, 0, -1); second difference over h² = 1/16
        const auto a = drift_A(t, 0.0, x, EmpiricalMeasure::dirac(Eigen::VectorXd::Zero(3)));
        CHECK(a[0] == doctest::Approx(-32.0));
        CHECK(a[1] == doctest::Approx(0.0));
        CHECK(a[2] == doctest::Approx(32.0));
        const Eigen::VectorXd lpsi = t.dirichlet_laplacian() * x;
        CHECK((a + lpsi).norm() < 1e-12);
    }
}

TEST_CASE("porous pairing realizes the mass matrix") {
    const DiscretizedTriple t(pde(ModelKind::porous_media, 3, 3.0));
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int k = 0; k < 20; ++k) {
        Eigen::VectorXd w(3), v(3);
        for (int i = 0; i < 3; ++i) { w[i] = g(rng); v[i] = g(rng); }
        const Eigen::VectorXd lw = t.dirichlet_laplacian() * w;
        CHECK(pairing(t, lw, v) == doctest::Approx(0.25 * w.dot(v)).epsilon(1e-12));
    }
    CHECK(pairing(t, Eigen::VectorXd::Zero(3), Eigen::Vector3d(1, 2, 3)) == 0.0);
}

TEST_CASE("jump coefficient examples") {
    const EmpiricalMeasure d0 = EmpiricalMeasure::dirac(Eigen::VectorXd::Zero(1));
    ModelConfig m = linear(1.0, 0.0, 0.5, 1.0);
    m.marks = {{2.0}, {1.0}};
    const DiscretizedTriple t(m);
    CHECK(jump_f(t, 0.0, Eigen::VectorXd::Constant(1, 7.0), d0, 0)[0] == doctest::Approx(1.0));
    CHECK(jump_f_at(t, 0.0, Eigen::VectorXd::Constant(1, 7.0), d0, 2.0)[0] == doctest::Approx(1.0));
    CHECK_THROWS_AS(jump_f_at(t, 0.0, Eigen::VectorXd::Zero(1), d0, 3.0), ValidationError);
    m.sigma = 0.0;
    CHECK(jump_f(DiscretizedTriple(m), 0.0, Eigen::VectorXd::Constant(1, 7.0), d0, 0).norm() == 0.0);

    for (ModelKind kind : {ModelKind::p_laplace, ModelKind::porous_media}) {
        ModelConfig p = pde(kind, 5, 3.0, 0.4);
        p.sigma = 1.0;
        p.marks = {{1.0}, {1.0}};
        const DiscretizedTriple tp(p);
        const auto f = jump_f(tp, 0.0, Eigen::VectorXd::Zero(5), EmpiricalMeasure::dirac(Eigen::VectorXd::Zero(5)), 0);
        CHECK(norm(tp, Space::H, f) <= tp.envelope_l2() * (1.0 + 1e-12));
        CHECK(norm(tp, Space::H, tp.jump_profile()) == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("norm and pairing identities on random inputs") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    for (ModelKind kind : {ModelKind::mv_sde, ModelKind::p_laplace, ModelKind::porous_media}) {
        ModelConfig m = kind == ModelKind::mv_sde ? linear(1.0, 0.5, 0.5, 1.0) : pde(kind, 6, 3.0);
        if (kind == ModelKind::mv_sde) { m.kind = kind; m.n = 6; }
        const DiscretizedTriple t(m);
        for (int k = 0; k < 50; ++k) {
            Eigen::VectorXd a(6), b(6), v(6);
            for (int i = 0; i < 6; ++i) { a[i] = g(rng); b[i] = g(rng); v[i] = g(rng); }
            const double lhs = pairing(t, a + b, v);
            const double rhs = pairing(t, a, v) + pairing(t, b, v);
            CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(pairing(t, a, v)) + std::abs(pairing(t, b, v)) + 1e-300));
            const double hn = norm(t, Space::H, a);
            CHECK(hn * hn == doctest::Approx(a.dot(t.h_gram() * a)).epsilon(1e-12));
            // dual norm bounds the pairing
            CHECK(std::abs(pairing(t, a, v)) <= norm(t, Space::V_star, a) * norm(t, Space::V, v) * (1 + 1e-9));
        }
    }
}

TEST_CASE("monotone structure of the PDE drifts") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    const DiscretizedTriple pl(pde(ModelKind::p_laplace, 7, 3.0, 0.0));
    const DiscretizedTriple pm(pde(ModelKind::porous_media, 7, 3.0));
    const EmpiricalMeasure d0 = EmpiricalMeasure::dirac(Eigen::VectorXd::Zero(7));
    for (int k = 0; k < 200; ++k) {
        Eigen::VectorXd x(7), y(7);
        for (int i = 0; i < 7; ++i) { x[i] = 3 * g(rng); y[i] = 3 * g(rng); }
        const Eigen::VectorXd d = drift_A(pl, 0, x, d0) - drift_A(pl, 0, y, d0);
        CHECK(pairing(pl, d, x - y) <= 1e-9 * d.norm() * (x - y).norm());
        double expected = 0.0;
        for (int i = 0; i < 7; ++i) expected -= x[i] * std::abs(x[i]) * x[i] * pm.mesh();
        const double got = pairing(pm, drift_A(pm, 0, x, d0), x);
        CHECK(got == doctest::Approx(expected).epsilon(1e-10));
        CHECK(got <= 0.0);
    }
}

TEST_CASE("hypothesis margin is zero on identical inputs") {
    const DiscretizedTriple t(pde(ModelKind::porous_media, 3, 3.0));
    const Eigen::Vector3d x(0.3, -1.0, 2.0);
    const EmpiricalMeasure mu = EmpiricalMeasure::dirac(Eigen::Vector3d(1, 1, 1));
    const HypothesisSample s{0.1, x, x, mu, mu, Eigen::Vector3d(1, 0, 0)};
    CHECK(hypothesis_margin(t, Hypothesis::monotonicity, s) == 0.0);
}

TEST_CASE("sampled hypothesis check and its negative control") {
    ModelConfig m = linear(1.0, 0.1, 0.5, 1.0);
    const auto good = check_hypotheses(DiscretizedTriple(m), 2000, 9);
    CHECK(good.total_violations() == 0);
    CHECK(good.records.size() == 6);
    m.coercivity_override = 50.0;
    const auto bad = check_hypotheses(DiscretizedTriple(m), 2000, 9);
    CHECK(bad.total_violations() > 0);
    bool witnessed = false;
    for (const auto& r : bad.records)
        if (r.violations > 0) witnessed = witnessed || r.witness.has_value();
    CHECK(witnessed);
    // same seed, same report
    const auto again = check_hypotheses(DiscretizedTriple(m), 2000, 9);
    for (std::size_t i = 0; i < bad.records.size(); ++i)
        CHECK(bad.records[i].worst_margin == again.records[i].worst_margin);
}

}
