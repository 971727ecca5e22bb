#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "gapstab/numerics.hpp"
#include "gapstab/tridiagonal.hpp"

using namespace gapstab;

TEST_SUITE("numerics") {

TEST_CASE("gauss_legendre integrates polynomials of degree 2n-1 exactly") {
    for (int n : {1, 2, 5, 16, 40}) {
        const QuadratureRule r = gauss_legendre(n);
        double sw = 0.0;
        for (double w : r.weights) sw += w;
        CHECK(sw == doctest::Approx(2.0).epsilon(1e-14));
        const int deg = 2 * n - 2;
        CHECK(r.integrate([&](double x) { return std::pow(x, deg) + std::pow(x, deg + 1); }) ==
              doctest::Approx(2.0 / (deg + 1)).epsilon(1e-13));
    }
    const QuadratureRule r = gauss_legendre(8, 1.0, 3.0);
    CHECK(r.integrate([](double x) { return x * x * x; }) == doctest::Approx(20.0).epsilon(1e-14));
}

TEST_CASE("graded rule resolves algebraic endpoint singularities") {
    const QuadratureRule r = graded_composite_rule(0.0, 1.0, 4, 16, true, false);
    CHECK(r.integrate([](double x) { return 1.0 / std::sqrt(x); }) == doctest::Approx(2.0).epsilon(1e-11));
    const QuadratureRule l = graded_composite_rule(-1.0, 0.0, 3, 16, false, true, 80);
    CHECK(l.integrate([](double x) { return std::pow(-x, -0.75); }) == doctest::Approx(4.0).epsilon(1e-10));
    // next to a nonzero endpoint the grading stops at 1e−12 relative
    const QuadratureRule both = graded_composite_rule(0.0, 1.0, 4, 16, true, true);
    CHECK(both.integrate([](double x) { return std::pow(x * (1 - x), -0.25); }) ==
          doctest::Approx(std::tgamma(0.75) * std::tgamma(0.75) / std::tgamma(1.5)).epsilon(1e-8));
}

TEST_CASE("fornberg weights reproduce derivatives of polynomials") {
    const std::vector<double> nodes{-1.0, -0.3, 0.2, 0.9, 1.7};
    const auto w = fornberg_weights(0.1, nodes, 2);
    auto p = [](double x) { return 1 + 2 * x - x * x + 0.5 * x * x * x; };
    double d0 = 0, d1 = 0, d2 = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        d0 += w[0][i] * p(nodes[i]);
        d1 += w[1][i] * p(nodes[i]);
        d2 += w[2][i] * p(nodes[i]);
    }
    CHECK(d0 == doctest::Approx(p(0.1)).epsilon(1e-13));
    CHECK(d1 == doctest::Approx(2 - 0.2 + 1.5 * 0.01).epsilon(1e-12));
    CHECK(d2 == doctest::Approx(-2 + 3 * 0.1).epsilon(1e-11));
}

TEST_CASE("differentiate on a non-uniform grid") {
    std::vector<double> x, f;
    for (int i = 0; i <= 400; ++i) {
        const double t = -1.0 + 2.0 * i / 400.0;
        x.push_back(t + 0.1 * std::sin(3 * t) / 400.0);
        f.push_back(std::sin(x.back()));
    }
    const NodalDerivatives d = differentiate(x, f);
    double e1 = 0, e2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        e1 = std::max(e1, std::abs(d.d1[i] - std::cos(x[i])));
        e2 = std::max(e2, std::abs(d.d2[i] + std::sin(x[i])));
    }
    CHECK(e1 < 1e-8);
    CHECK(e2 < 1e-5);
}

TEST_CASE("normal distribution helpers") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)).epsilon(1e-15));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-14));
    CHECK(mills_ratio(1.0) == doctest::Approx((1 - normal_cdf(1.0)) / normal_pdf(1.0)).epsilon(1e-13));
    // asymptotics 1/x − 1/x³ + 3/x⁵
    const double x = 40.0;
    CHECK(mills_ratio(x) == doctest::Approx(1 / x - 1 / (x * x * x) + 3 / std::pow(x, 5)).epsilon(1e-9));
}

TEST_CASE("least squares recovers an exact line") {
    const std::vector<double> x{0, 1, 2, 3, 4}, y{1, 3, 5, 7, 9};
    const LineFit f = least_squares_line(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
}

TEST_CASE("random helpers are deterministic and in range") {
    CHECK(splitmix64(1) == splitmix64(1));
    CHECK(splitmix64(1) != splitmix64(2));
    std::mt19937_64 a(7), b(7);
    for (int i = 0; i < 1000; ++i) {
        const double u = uniform01(a);
        CHECK(u == uniform01(b));
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    std::mt19937_64 c(3);
    for (int i = 0; i < 100; ++i) {
        const double v = uniform(c, -2.0, 5.0);
        CHECK(v >= -2.0);
        CHECK(v < 5.0);
    }
}

TEST_CASE("tridiagonal eigenvalues of the discrete Laplacian") {
    const int n = 50;
    Tridiagonal t;
    t.diag.assign(n, 2.0);
    t.off.assign(n - 1, -1.0);
    const auto ev = tridiagonal_eigenvalues(t);
    for (int k = 0; k < n; ++k)
        CHECK(ev[k] == doctest::Approx(2 - 2 * std::cos((k + 1) * std::numbers::pi / (n + 1))).epsilon(1e-12));
    const TridiagonalEigensystem es = tridiagonal_eigensystem(t);
    for (int k : {0, 7, 49}) {
        const auto tv = t.multiply(es.vectors[k]);
        double res = 0, nrm = 0;
        for (int i = 0; i < n; ++i) {
            res = std::max(res, std::abs(tv[i] - es.values[k] * es.vectors[k][i]));
            nrm += es.vectors[k][i] * es.vectors[k][i];
        }
        CHECK(res < 1e-12);
        CHECK(nrm == doctest::Approx(1.0).epsilon(1e-12));
    }
    double dot = 0;
    for (int i = 0; i < n; ++i) dot += es.vectors[3][i] * es.vectors[4][i];
    CHECK(std::abs(dot) < 1e-12);
}

TEST_CASE("inverse iteration finds the nearest eigenvector") {
    const int n = 30;
    Tridiagonal t;
    t.diag.assign(n, 2.0);
    t.off.assign(n - 1, -1.0);
    const double lam = 2 - 2 * std::cos(std::numbers::pi / (n + 1));
    const auto v = inverse_iteration(t, lam * 1.001, {});
    const auto tv = t.multiply(v);
    double res = 0;
    for (int i = 0; i < n; ++i) res = std::max(res, std::abs(tv[i] - lam * v[i]));
    CHECK(res < 1e-10);
}

TEST_CASE("1x1 tridiagonal") {
    Tridiagonal t;
    t.diag = {4.0};
    const auto ev = tridiagonal_eigenvalues(t);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0] == 4.0);
}

}
