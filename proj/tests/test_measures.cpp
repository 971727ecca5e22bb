#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "gapstab/measures.hpp"
#include "gapstab/spectral.hpp"

using namespace gapstab;

namespace {

QuadratureMeasure random_measure(std::mt19937_64& rng, int atoms) {
    std::vector<double> x, w;
    for (int i = 0; i < atoms; ++i) {
        x.push_back(uniform(rng, -2.0, 2.0));
        w.push_back(uniform(rng, 0.1, 1.0));
    }
    return QuadratureMeasure::from_atoms(x, w);
}

}  // namespace

TEST_SUITE("measures") {

TEST_CASE("target laws: cdf and quantile are inverse") {
    for (const TargetDistribution& t : {TargetDistribution::beta(3.0), TargetDistribution::beta(7.5),
                                        TargetDistribution::gauss(), TargetDistribution::cauchy(-3.0),
                                        TargetDistribution::cauchy(-1.5)}) {
        CAPTURE(t.name());
        for (double u : {1e-6, 0.01, 0.2, 0.5, 0.77, 0.999}) CHECK(t.cdf(t.quantile(u)) == doctest::Approx(u).epsilon(1e-10));
        CHECK(t.cdf(0.0) == doctest::Approx(0.5));
    }
}

TEST_CASE("target absolute means") {
    // E|X| = (2/N) Γ((N+1)/2) / (√π Γ(N/2)) for the symmetrized beta
    for (double N : {2.0, 3.0, 7.5})
        CHECK(TargetDistribution::beta(N).abs_mean() ==
              doctest::Approx(2 / N * std::tgamma((N + 1) / 2) / (std::sqrt(std::numbers::pi) * std::tgamma(N / 2)))
                  .epsilon(1e-12));
    CHECK(TargetDistribution::gauss().abs_mean() == doctest::Approx(std::sqrt(2 / std::numbers::pi)).epsilon(1e-12));
    // cauchy(−3): density ∝ (1+x²)^{−5/2}, Z = 4/3, E|X| = 2·(1/3)/(4/3)
    CHECK(TargetDistribution::cauchy(-3.0).abs_mean() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(TargetDistribution::cauchy(-3.0).norm_const() == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("W1 metric axioms on random atomic measures") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const QuadratureMeasure a = random_measure(rng, 5 + trial % 7);
        const QuadratureMeasure b = random_measure(rng, 3 + trial % 5);
        const QuadratureMeasure c = random_measure(rng, 8);
        CHECK(w1_distance(a, a) == doctest::Approx(0.0));
        CHECK(w1_distance(a, b) == doctest::Approx(w1_distance(b, a)).epsilon(1e-12));
        CHECK(w1_distance(a, b) > 0.0);
        CHECK(w1_distance(a, c) <= w1_distance(a, b) + w1_distance(b, c) + 1e-12);
    }
}

TEST_CASE("W1 of a translation is the shift") {
    std::vector<double> x{-1.0, 0.2, 0.5, 3.0}, w{0.1, 0.4, 0.2, 0.3};
    std::vector<double> y = x;
    for (double& v : y) v += 0.37;
    CHECK(w1_distance(QuadratureMeasure::from_atoms(x, w), QuadratureMeasure::from_atoms(y, w)) ==
          doctest::Approx(0.37).epsilon(1e-13));
}

TEST_CASE("W1 between a point mass and the Gaussian is E|Z|") {
    const QuadratureMeasure delta0 = QuadratureMeasure::from_atoms({0.0}, {1.0});
    CHECK(w1_distance(delta0, target_measure(TargetDistribution::gauss())) ==
          doctest::Approx(std::sqrt(2 / std::numbers::pi)).epsilon(1e-9));
}

TEST_CASE("w1_quantile for a scaling is |1-s| E|X|") {
    const TargetDistribution g = TargetDistribution::gauss();
    const double s = 0.8;
    CHECK(w1_quantile([&](double u) { return s * g.quantile(u); }, [&](double u) { return g.quantile(u); }) ==
          doctest::Approx(0.2 * std::sqrt(2 / std::numbers::pi)).epsilon(1e-8));
}

TEST_CASE("uniform pieces") {
    const QuadratureMeasure u = QuadratureMeasure::from_pieces({{0.0, 1.0, 1.0}});
    CHECK(u.cdf(0.25) == doctest::Approx(0.25));
    const QuadratureMeasure d = QuadratureMeasure::from_atoms({0.5}, {1.0});
    CHECK(w1_distance(u, d) == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("from_atoms merges, sorts and normalizes") {
    const QuadratureMeasure m = QuadratureMeasure::from_atoms({2.0, 1.0, 2.0}, {1.0, 2.0, 1.0});
    REQUIRE(m.size() == 2);
    CHECK(m.points()[0] == 1.0);
    CHECK(m.weights()[1] == doctest::Approx(0.5));
    CHECK(m.mean() == doctest::Approx(1.5));
    CHECK_THROWS_AS(QuadratureMeasure::from_atoms({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(QuadratureMeasure::from_atoms({1.0}, {-1.0}), std::invalid_argument);
}

TEST_CASE("csv round trip is lossless") {
    std::mt19937_64 rng(2);
    const QuadratureMeasure m = random_measure(rng, 9);
    std::stringstream ss;
    m.write_csv(ss);
    const QuadratureMeasure r = QuadratureMeasure::read_csv(ss);
    CHECK(r.points() == m.points());
    CHECK(r.weights() == m.weights());
}

TEST_CASE("lp norms") {
    const QuadratureMeasure m = QuadratureMeasure::from_atoms({-1.0, 2.0}, {0.5, 0.5});
    const std::vector<double> f{1.0, 3.0};
    CHECK(lp_norm(f, m, 1.0) == doctest::Approx(2.0));
    CHECK(lp_norm(f, m, 2.0) == doctest::Approx(std::sqrt(5.0)));
    CHECK(lp_norm([](double x) { return x; }, m, 1.0) == doctest::Approx(1.5));
}

TEST_CASE("pushforward of the identity eigenfunction onto the beta law") {
    const DiscreteOperator op = discretize(jacobi_model(3.0), 1000);
    const GapResult g = spectral_gap(op);
    const TargetDistribution t = TargetDistribution::beta(3.0);
    const auto coupled = w1_monotone_coupling(op, g.f, t);
    REQUIRE(coupled.has_value());
    CHECK(*coupled < 1e-9);
    CHECK(w1_distance(pushforward_cells(op, g.f), target_measure(t)) < 1e-5);
    std::vector<double> flipped(g.f.begin(), g.f.end());
    for (double& v : flipped) v = -v;
    CHECK_FALSE(w1_monotone_coupling(op, flipped, t).has_value());
}

TEST_CASE("monotone coupling on the Cauchy and Gaussian models") {
    const DiscreteOperator c = discretize(cauchy_model(-3.0), 1000);
    CHECK(*w1_monotone_coupling(c, spectral_gap(c).f, TargetDistribution::cauchy(-3.0)) < 1e-8);
    const DiscreteOperator o = discretize(gaussian_model(), 1000);
    CHECK(*w1_monotone_coupling(o, spectral_gap(o).f, TargetDistribution::gauss()) < 1e-8);
}

TEST_CASE("grid measure") {
    const DiscreteOperator op = discretize(jacobi_model(3.0), 50);
    const QuadratureMeasure gm = grid_measure(op);
    CHECK(gm.size() == 50);
    CHECK(std::abs(gm.mean()) < 1e-12);
}

}
