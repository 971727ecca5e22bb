#pragma once

// One-dimensional probability measures, pushforwards and W1.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gapstab/numerics.hpp"

namespace gapstab {

struct DiscreteOperator;

enum class TargetFamily { beta, gauss, cauchy };

/// Reference laws: symmetrized Beta(N/2, N/2) on [−1, 1] with density
/// ∝ (1−x²)^{N/2−1}, the standard Gaussian, and the generalized Cauchy law
/// with density ∝ (1+x²)^{N/2−1}, N < −1.
class TargetDistribution {
public:
    static TargetDistribution beta(double N);
    static TargetDistribution gauss();
    static TargetDistribution cauchy(double N);

    [[nodiscard]] TargetFamily family() const noexcept { return family_; }
    [[nodiscard]] double N() const noexcept { return n_; }
    [[nodiscard]] std::string name() const;

    [[nodiscard]] double pdf(double x) const;
    [[nodiscard]] double cdf(double x) const;
    [[nodiscard]] double quantile(double u) const;
    /// E[X · 1{X ≤ a}].
    [[nodiscard]] double partial_mean(double a) const;
    [[nodiscard]] double abs_mean() const { return -2.0 * partial_mean(0.0); }
    /// Normalizing constant of the unnormalized density above (1 for gauss: √(2π)).
    [[nodiscard]] double norm_const() const noexcept { return z_; }
    [[nodiscard]] double lower() const noexcept;
    [[nodiscard]] double upper() const noexcept;

private:
    TargetFamily family_ = TargetFamily::gauss;
    double n_ = 0.0;
    double z_ = 1.0;
};

/// Uniformly spread mass on [lo, hi]; lo == hi is an atom.
struct Piece {
    double lo = 0.0;
    double hi = 0.0;
    double mass = 0.0;
};

/// Probability measure given by sorted atoms (support points and weights),
/// optionally by uniformly spread pieces, and optionally by an analytic law.
/// W1 uses the analytic law if present, else the pieces, else the atoms;
/// integrals always use the atoms.
class QuadratureMeasure {
public:
    QuadratureMeasure() = default;
    /// Sorts, merges points within 1e−13 relative and renormalizes.
    static QuadratureMeasure from_atoms(std::vector<double> points, std::vector<double> weights);
    static QuadratureMeasure from_pieces(std::vector<Piece> pieces);

    [[nodiscard]] const std::vector<double>& points() const noexcept { return points_; }
    [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }
    [[nodiscard]] const std::vector<Piece>& pieces() const noexcept { return pieces_; }
    [[nodiscard]] const std::optional<TargetDistribution>& analytic() const noexcept { return analytic_; }
    void set_analytic(const TargetDistribution& target) { analytic_ = target; }

    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] double integrate(const ScalarFunction& f) const;
    [[nodiscard]] double mean() const;
    /// Distribution function of the represented law (right-continuous).
    [[nodiscard]] double cdf(double t) const;

    void write_csv(std::ostream& os) const;
    static QuadratureMeasure read_csv(std::istream& is);

private:
    std::vector<double> points_;
    std::vector<double> weights_;
    std::vector<Piece> pieces_;
    std::optional<TargetDistribution> analytic_;
};

/// Atoms (f(t_j), p_j).
QuadratureMeasure pushforward(const QuadratureMeasure& mu, std::span<const double> f);
/// Nodal measure of a discretization: atoms (x_i, w_i).
QuadratureMeasure grid_measure(const DiscreteOperator& op);
/// Pushforward of the cell masses by f with each bounded cell spread
/// uniformly between the reconstructed edge values of f; unbounded end
/// cells are split into atoms at their quadrature points.
QuadratureMeasure pushforward_cells(const DiscreteOperator& op, std::span<const double> f);

/// Exact ∫|F₁ − F₂| for piecewise-linear distribution functions; adaptive
/// Gauss–Kronrod with analytic tails when one side is an analytic law.
double w1_distance(const QuadratureMeasure& nu1, const QuadratureMeasure& nu2);
/// ∫₀¹ |Q₁(u) − Q₂(u)| du for two analytic laws given by quantile functions.
double w1_quantile(const ScalarFunction& q1, const ScalarFunction& q2, int panels = 256);

/// W₁(f#μ, target) through the monotone coupling x ↦ Q(F_μ(x)) when the
/// nodal f is nondecreasing: ∫|f(x) − Q(F_μ(x))| dμ on the cell quadrature
/// with F_μ from exact cell masses plus partial integrals of the density.
/// Empty when f is not monotone. The target must be symmetric about 0.
std::optional<double> w1_monotone_coupling(const DiscreteOperator& op, std::span<const double> f,
                                           const TargetDistribution& target);

double lp_norm(std::span<const double> f, const QuadratureMeasure& mu, double p);
double lp_norm(const ScalarFunction& f, const QuadratureMeasure& mu, double p);

/// Quadrature representation of a target law with `resolution` panels, with
/// the analytic law attached.
QuadratureMeasure target_measure(const TargetDistribution& target, int resolution = 64);

}  // namespace gapstab
