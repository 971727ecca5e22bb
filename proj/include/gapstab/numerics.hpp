#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gapstab {

/// Value of a scalar function together with its first two derivatives.
struct Jet {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

using JetFunction = std::function<Jet(double)>;
using ScalarFunction = std::function<double(double)>;

/// Thrown when an iterative routine stops before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}
    [[nodiscard]] double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// Nodes and weights of a quadrature rule on some interval.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
    [[nodiscard]] double integrate(const ScalarFunction& f) const;
};

/// n-point Gauss–Legendre rule on [-1, 1] (Newton iteration on the
/// three-term recurrence, symmetric nodes).
QuadratureRule gauss_legendre(int n);

/// Gauss–Legendre rule affinely mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Composite Gauss–Legendre rule on [a, b] with `panels` uniform panels
/// and geometric refinement towards the endpoints flagged in
/// `grade_left` / `grade_right`. Integrable algebraic endpoint singularities
/// are resolved to near machine precision.
QuadratureRule graded_composite_rule(double a, double b, int panels, int points_per_panel,
                                     bool grade_left, bool grade_right, int levels = 28,
                                     double ratio = 0.15);

/// Finite-difference weights (Fornberg) for derivatives 0..max_order at x0
/// from arbitrary distinct stencil nodes. Returns weights[order][node].
std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> nodes,
                                                  int max_order);

/// First and second derivatives of nodal data on a non-uniform grid using
/// five-point stencils (centered in the interior, one-sided near the ends).
struct NodalDerivatives {
    std::vector<double> d1;
    std::vector<double> d2;
};
NodalDerivatives differentiate(std::span<const double> x, std::span<const double> f);

/// Standard normal CDF and density.
double normal_cdf(double x);
double normal_pdf(double x);

/// Mills ratio (1 - Φ(x)) / φ(x), stable for large x.
double mills_ratio(double x);

/// Least squares fit y ≈ intercept + slope·x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};
LineFit least_squares_line(std::span<const double> x, std::span<const double> y);

/// SplitMix64 finalizer, used to derive independent per-sample seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Uniform double in [0, 1) from the top 53 bits (portable across standard libraries).
double uniform01(std::mt19937_64& rng);
/// Uniform double in [a, b).
double uniform(std::mt19937_64& rng, double a, double b);

}  // namespace gapstab
