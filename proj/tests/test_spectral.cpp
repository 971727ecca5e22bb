#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gapstab/spectral.hpp"

using namespace gapstab;

TEST_SUITE("spectral") {

TEST_CASE("jacobi eigenvalues k(k+N-1)") {
    for (double N : {2.0, 3.0, 5.0}) {
        const DiscreteOperator op = discretize(jacobi_model(N), 2000);
        const SpectralDecomposition dec = eigen_lowest(op, 4);
        CHECK(std::abs(dec.values[0]) < 1e-9);
        for (int k = 1; k < 4; ++k) CHECK(dec.values[k] == doctest::Approx(k * (k + N - 1)).epsilon(1e-5));
    }
}

TEST_CASE("cauchy gap |N| and OU spectrum") {
    const SpectralDecomposition c = eigen_lowest(discretize(cauchy_model(-3.0), 2000), 2);
    CHECK(std::abs(c.values[1] - 3.0) < 1e-5);
    const SpectralDecomposition ou = eigen_lowest(discretize(gaussian_model(), 2000), 4);
    for (int k = 1; k < 4; ++k) CHECK(ou.values[k] == doctest::Approx(k).epsilon(1e-5));
}

TEST_CASE("operator is symmetric in L2(mu) with exact cell masses") {
    for (const DiffusionModel& m : {jacobi_model(3.0), cauchy_model(-2.0), gaussian_model(1.0, 0.05)}) {
        const DiscreteOperator op = discretize(m, 300);
        double total = 0;
        for (double w : op.mass) total += w;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        std::mt19937_64 rng(5);
        std::normal_distribution<double> z;
        std::vector<double> f(op.size()), g(op.size());
        for (auto& v : f) v = z(rng);
        for (auto& v : g) v = z(rng);
        const double a = op.inner(op.apply(f), g);
        const double b = op.inner(f, op.apply(g));
        CHECK(a == doctest::Approx(b).epsilon(1e-11));
        CHECK(op.inner(op.apply(f), f) == doctest::Approx(op.dirichlet_form(f)).epsilon(1e-11));
        CHECK(op.dirichlet_form(f) >= 0.0);
    }
}

TEST_CASE("affine functions are transported exactly") {
    const DiscreteOperator op = discretize(jacobi_model(3.0), 200);
    const auto Lx = op.apply(op.nodes);
    // the end cells carry the quadrature error of the singular-derivative weight
    for (std::size_t i = 1; i + 1 < op.size(); ++i) CHECK(Lx[i] == doctest::Approx(3.0 * op.nodes[i]).epsilon(1e-11));
    CHECK(Lx.front() == doctest::Approx(3.0 * op.nodes.front()).epsilon(1e-7));
    CHECK(Lx.back() == doctest::Approx(3.0 * op.nodes.back()).epsilon(1e-7));
}

TEST_CASE("eigenvectors are orthonormal and the gap eigenfunction normalized") {
    const DiscreteOperator op = discretize(jacobi_model(3.0), 800);
    const SpectralDecomposition dec = eigen_lowest(op, 5);
    for (std::size_t i = 0; i < dec.size(); ++i)
        for (std::size_t j = 0; j < dec.size(); ++j)
            CHECK(std::abs(op.inner(dec.vectors[i], dec.vectors[j]) - (i == j ? 1.0 : 0.0)) < 1e-9);
    const GapResult g = spectral_gap(dec);
    CHECK(g.gamma_mass == doctest::Approx(0.75).epsilon(1e-10));
    // discrete form vs reconstructed ∫Γ
    CHECK(op.dirichlet_form(g.f) == doctest::Approx(0.75).epsilon(1e-5));
    double xf = 0;
    for (std::size_t i = 0; i < op.size(); ++i) xf += op.mass[i] * op.nodes[i] * g.f[i];
    CHECK(xf > 0.0);
    CHECK(gamma_normalization(Dimension(3.0)) == doctest::Approx(0.75));
    CHECK(gamma_normalization(Dimension::infinite()) == 1.0);
}

TEST_CASE("semigroup acts diagonally on eigenvectors") {
    const DiscreteOperator op = discretize(jacobi_model(3.0), 400);
    const SpectralDecomposition dec = eigen_lowest(op, 6);
    const SemigroupResult r = semigroup_apply(dec, 0.3, dec.vectors[2]);
    for (std::size_t i = 0; i < op.size(); i += 37)
        CHECK(r.values[i] == doctest::Approx(std::exp(-0.3 * dec.values[2]) * dec.vectors[2][i]).epsilon(1e-9));
    CHECK(r.remainder_norm < 1e-9);
}

TEST_CASE("Richardson extrapolation sharpens the gap") {
    const auto ev = extrapolated_eigenvalues(jacobi_model(3.0), 400, Mapping::direct(), 3);
    CHECK(std::abs(ev[1] - 3.0) < 1e-7);
}

TEST_CASE("ultracontractive kernel bound") {
    const DiscreteOperator op = discretize(jacobi_model(3.0), 600);
    const SpectralDecomposition dec = eigen_lowest(op, 40);
    const std::vector<double> times{0.25, 0.5, 1.0};
    for (const auto& row : ultracontractivity_probe(dec, times)) {
        CHECK(row.sup_kernel_bound <= row.theory_bound);
        CHECK_FALSE(row.flagged);
    }
    const SpectralDecomposition c = eigen_lowest(discretize(cauchy_model(-3.0), 200), 3);
    CHECK_THROWS_AS(ultracontractivity_probe(c, times), std::invalid_argument);
}

TEST_CASE("reconstruction and edge values") {
    const DiscreteOperator op = discretize(jacobi_model(3.0), 100);
    std::vector<double> q(op.size());
    for (std::size_t i = 0; i < op.size(); ++i) q[i] = op.nodes[i] * op.nodes[i];
    const CellField cf = reconstruct(op, q);
    for (std::size_t k = 0; k < op.cell_nodes.size(); k += 13) {
        CHECK(cf.value[k] == doctest::Approx(op.cell_nodes[k] * op.cell_nodes[k]).epsilon(1e-10));
        CHECK(cf.slope[k] == doctest::Approx(2 * op.cell_nodes[k]).epsilon(1e-8));
    }
    CHECK(cell_integral(op, cf.value) == doctest::Approx(0.25).epsilon(1e-10));
    const auto ev = edge_values(op, op.nodes);
    CHECK(ev.front() == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(ev.back() == doctest::Approx(1.0).epsilon(1e-10));
}

}
