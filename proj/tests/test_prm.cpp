#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mvldp/errors.hpp"
#include "mvldp/prm.hpp"
#include "support.hpp"

using namespace mvldp;

TEST_SUITE("prm") {

TEST_CASE("entropy l") {
    CHECK(entropy_l(1.0) == 0.0);
    CHECK(entropy_l(0.0) == 1.0);
    CHECK(entropy_l(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(entropy_l(-0.1), ValidationError);
    double prev2 = entropy_l(0.0), prev = entropy_l(0.01);
    for (int i = 2; i <= 1000; ++i) {
        const double r = 0.01 * i;
        const double v = entropy_l(r);
        CHECK(v >= 0.0);
        if (std::abs(r - 1.0) > 1e-9) CHECK(v > 0.0);
        CHECK(v - 2 * prev + prev2 >= -1e-15);  // convex on the grid
        prev2 = prev;
        prev = v;
    }
}

TEST_CASE("upper inverse of l") {
    for (double r : {1.0, 1.001, 1.5, 2.0, 7.0, 40.0}) CHECK(entropy_upper_inverse(entropy_l(r)) == doctest::Approx(r - 1.0).epsilon(1e-9));
}

TEST_CASE("control cost examples") {
    const MarkSpace one{{1.0}, {1.0}};
    const MarkSpace two{{-1.0, 1.0}, {1.0, 1.0}};
    CHECK(control_cost_Q(Control::constant(1.0, 3, 2, 1.0), two) == 0.0);
    CHECK(control_cost_Q(Control::constant(1.0, 3, 2, 0.0), two) == doctest::Approx(2.0).epsilon(1e-15));
    Control c = Control::constant(1.0, 2, 1, 1.0);
    c.values(1, 0) = std::exp(1.0);
    CHECK(control_cost_Q(c, one) == doctest::Approx(0.5).epsilon(1e-15));
    Control g2 = Control::constant(1.0, 1, 1, 2.0);
    CHECK(control_cost_Q(g2, one) == doctest::Approx(2 * std::log(2.0) - 1.0).epsilon(1e-15));
}

TEST_CASE("control validation and lookup") {
    Control c = Control::constant(2.0, 4, 1, 1.0);
    CHECK(c.cell_at(0.0) == 0);
    CHECK(c.cell_at(0.5) == 0);
    CHECK(c.cell_at(0.5000001) == 1);
    CHECK(c.cell_at(2.0) == 3);
    c.values(2, 0) = -1.0;
    CHECK_THROWS_AS(c.validate(1), ValidationError);
    c.values(2, 0) = 1.0;
    CHECK_THROWS_AS(c.validate(2), ValidationError);
}

TEST_CASE("sampling degenerate cases and reproducibility") {
    const MarkSpace two{{-1.0, 1.0}, {1.0, 1.0}};
    CHECK(sample_prm(two, Control::constant(1.0, 3, 2, 0.0), 10.0, 1).events.empty());
    const Control u = Control::constant(1.0, 3, 2, 1.0);
    const auto s1 = sample_prm(two, u, 5.0, 77);
    const auto s2 = sample_prm(two, u, 5.0, 77);
    CHECK(s1 == s2);
    CHECK_FALSE(s1 == sample_prm(two, u, 5.0, 78));
    for (std::size_t i = 1; i < s1.events.size(); ++i) {
        const auto& a = s1.events[i - 1];
        const auto& b = s1.events[i];
        CHECK((a.t < b.t || (a.t == b.t && a.mark <= b.mark)));
    }
    for (const auto& e : s1.events) CHECK((e.t > 0.0 && e.t <= 1.0));
    std::ostringstream os;
    write_jump_stream_csv(os, s1, two);
    CHECK(os.str().rfind("t,mark_index,z_value\n", 0) == 0);
}

TEST_CASE("Poisson mean over seeds") {
    const MarkSpace two{{-1.0, 1.0}, {1.0, 1.0}};
    const Control u = Control::constant(1.0, 1, 2, 1.0);
    double total = 0.0;
    const int n = 10000;
    for (int s = 0; s < n; ++s) total += static_cast<double>(sample_prm(two, u, 1.0, static_cast<std::uint64_t>(s)).events.size());
    CHECK(std::abs(total / n - 2.0) <= 3.0 * std::sqrt(2.0 / n));
}

TEST_CASE("compensator drift examples") {
    const EmpiricalMeasure d0 = EmpiricalMeasure::dirac(Eigen::VectorXd::Zero(1));
    ModelConfig m = test::linear(1.0, 0.0, 1.0, 0.0);
    const DiscretizedTriple t(m);
    const std::vector<double> three{3.0}, unit{1.0};
    CHECK(compensator_drift(t, 0.0, Eigen::VectorXd::Zero(1), d0, three)[0] == doctest::Approx(2.0));
    CHECK(compensator_drift(t, 0.0, Eigen::VectorXd::Zero(1), d0, unit)[0] == 0.0);
    m.marks = {{-1.0, 1.0}, {1.0, 1.0}};
    const std::vector<double> twos{2.0, 2.0};
    CHECK(compensator_drift(DiscretizedTriple(m), 0.0, Eigen::VectorXd::Zero(1), d0, twos)[0] == doctest::Approx(0.0));
}

TEST_CASE("deviation functional stays below its bound on S^N") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> lg(-4.0, 3.0);
    const MarkSpace marks{{-1.0, 1.0}, {0.7, 0.3}};
    for (double N : {0.5, 2.0, 10.0}) {
        const double bound = deviation_bound(1.0, N, 1.0);
        // sharp on a single cell: r - 1 with l(r) = N
        CHECK(bound == doctest::Approx(entropy_upper_inverse(N)).epsilon(1e-12));
        for (int k = 0; k < 300; ++k) {
            Control c = Control::constant(1.0, 4, 2, 1.0);
            for (Eigen::Index i = 0; i < c.values.size(); ++i) c.values.data()[i] = std::exp(lg(rng));
            const double q = control_cost_Q(c, marks);
            if (q > N) continue;
            double dev = 0.0;
            for (std::size_t cell = 0; cell < 4; ++cell)
                for (std::size_t j = 0; j < 2; ++j)
                    dev += std::abs(c.values(cell, j) - 1.0) * marks.weights[j] * 0.25;
            CHECK(dev <= bound * (1 + 1e-12));
        }
    }
}

}
