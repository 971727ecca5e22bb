#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gapstab/estimates.hpp"
#include "gapstab/stein.hpp"

using namespace gapstab;

TEST_SUITE("estimates") {

TEST_CASE("family gaps") {
    CHECK(family_gap(Dimension(3.0)) == 3.0);
    CHECK(family_gap(Dimension::infinite()) == 1.0);
    CHECK(family_gap(Dimension(-3.0)) == 3.0);
}

TEST_CASE("deficits vanish on the exact models") {
    {
        const SpectralDecomposition dec = eigen_lowest(discretize(jacobi_model(3.0), 2000), 3);
        const DeficitReport d = eigen_deficit(dec);
        CHECK(std::abs(d.eps) < 1e-8);
        CHECK(d.deficit_l1 < 1e-8);
        CHECK(d.gamma_l1 == doctest::Approx(0.75).epsilon(1e-10));
        CHECK(d.identity_error < 1e-8);
        CHECK_FALSE(d.lichnerowicz_fault);
    }
    {
        const SpectralDecomposition dec = eigen_lowest(discretize(gaussian_model(), 2000), 3);
        const DeficitReport d = eigen_deficit(dec);
        CHECK(d.deficit_l1 < 1e-8);
        CHECK(d.target == doctest::Approx(1.0 + d.eps));
    }
    {
        const SpectralDecomposition dec = eigen_lowest(discretize(cauchy_model(-3.0), 2000), 3);
        const DeficitReport d = eigen_deficit(dec);
        CHECK(d.stein_l1 < 1e-6);
        CHECK(d.gamma_l1 == doctest::Approx(1.5).epsilon(1e-9));
    }
}

TEST_CASE("Bochner bound on Lh on a shrunk interval") {
    const SpectralDecomposition dec = eigen_lowest(discretize(scaled_model(jacobi_model(3.0), 0.99), 2000), 3);
    const DeficitReport d = eigen_deficit(dec);
    CHECK(d.eps == doctest::Approx(3.0 * (1 / 0.9801 - 1)).epsilon(1e-6));
    CHECK(d.lh_l1 <= d.bound_rhs);
    CHECK(d.deficit_l1 <= *constants_for(3.0).lemma32_C * d.eps);
}

TEST_CASE("eigen_deficit rejects an eigenvalue far from the family gap") {
    const SpectralDecomposition dec = eigen_lowest(discretize(jacobi_model(3.0), 200), 3);
    CHECK_THROWS_AS(eigen_deficit(dec, Dimension(10.0)), std::domain_error);
}

TEST_CASE("L1 spectral inequality on random centered functions") {
    const DiscreteOperator op = discretize(jacobi_model(3.0), 600);
    const SpectralDecomposition dec = eigen_lowest(op, 9);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> g(op.size(), 0.0);
        for (int k = 1; k <= 8; ++k) {
            const double a = uniform(rng, -1.0, 1.0);
            for (std::size_t i = 0; i < op.size(); ++i) g[i] += a * dec.vectors[k][i];
        }
        const L1Audit a = l1_spectral_inequality_audit(op, g, L1Regime::prop34, 3.0);
        CHECK(a.constant == doctest::Approx(4.1324487450337877));
        CHECK(a.lhs <= a.rhs);
        const L1Audit b = l1_spectral_inequality_audit(op, g, L1Regime::lemma41, 2.0);
        CHECK(b.gp >= b.lhs);
        CHECK(b.ratio > 0.0);
    }
    std::vector<double> ones(op.size(), 1.0);
    CHECK_THROWS_AS(l1_spectral_inequality_audit(op, ones, L1Regime::prop34, 3.0), std::invalid_argument);
}

TEST_CASE("hypercontractive decay envelope") {
    const SpectralDecomposition dec = eigen_lowest(discretize(gaussian_model(), 800), 12);
    std::vector<double> g(dec.vectors[1].begin(), dec.vectors[1].end());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += 0.3 * dec.vectors[3][i];
    const std::vector<double> times{0.0, 0.1, 0.5, 1.0, 2.0};
    const DecayTable t = hypercontractive_decay_check(dec, g, 4.0, times);
    CHECK(t.rate == doctest::Approx(0.75));
    CHECK(t.C_p >= 1.0 - 1e-12);
    for (const auto& r : t.rows) CHECK(r.within);
    CHECK_THROWS(hypercontractive_decay_check(dec, g, 1.0, times));
}

TEST_CASE("Lp upgrade from the Poincare inequality") {
    const DiffusionModel m = cauchy_model(-3.0);
    const LpUpgradeAudit a = lp_upgrade_audit(m, [](double x) { return x; }, [](double) { return 1.0; }, 0.5, 3.0);
    CHECK(a.exponent == doctest::Approx(8.0 / 3.0));
    CHECK(a.pass);
    CHECK(a.lhs <= a.rhs);
    CHECK(a.lhs == doctest::Approx(0.7186).epsilon(1e-3));
}

TEST_CASE("Ornstein-Uhlenbeck counterexample") {
    double prev = 0.0;
    for (double r : {1.0, 2.0, 4.0, 8.0}) {
        const CounterexampleRecord c = ou_counterexample(r);
        CHECK(std::abs(c.l1_Lf - c.l1_Lf_exact) <= 1e-12);
        CHECK(c.l1_Lf_exact == doctest::Approx(2 * (1 - normal_cdf(r))).epsilon(1e-10));
        CHECK(c.ratio > prev);
        prev = c.ratio;
    }
    // f′ is continuous at r and f″ − xf′ jumps by 1 there
    const double r = 2.0, h = 1e-7;
    CHECK(ou_counterexample_derivative(r, r - h) == doctest::Approx(ou_counterexample_derivative(r, r + h)).epsilon(1e-5));
    CHECK_THROWS(ou_counterexample(-1.0));
}

}
