#pragma once

// Stein operators and discrepancies for the Beta, Gaussian and generalized
// Cauchy targets, the Cauchy Poisson-equation solver and constant audits.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gapstab/measures.hpp"
#include "gapstab/numerics.hpp"

namespace gapstab {

/// Class of test functions ‖g‖_∞ ≤ sup_bound, ‖g′‖_∞ ≤ lip_bound.
struct SteinTestClass {
    double sup_bound = 0.0;
    double lip_bound = 0.0;
    TargetDistribution target = TargetDistribution::gauss();

    /// (2/N, 2 + N) for Beta(N/2, N/2).
    static SteinTestClass beta(double N);
    /// (2, 4): ‖g′‖_∞ ≤ 4 as used for the Gaussian comparison.
    static SteinTestClass gauss();
    /// (L_N, K_N) from the a priori bounds on the Cauchy Poisson solution.
    static SteinTestClass cauchy(double N);
};

/// ∫ A g dν with A_beta g = (1−x²)g′ − Nxg, A_cauchy g = (1+x²)g′ + Nxg and
/// A_gauss g = g′ − xg, evaluated on the atoms of ν.
double stein_operator_apply(const TargetDistribution& target, const ScalarFunction& g,
                            const ScalarFunction& dg, const QuadratureMeasure& nu);

struct BetaDiscrepancy {
    double value = 0.0;         // ½ sup ∫A_beta g dν over the discretized class
    std::vector<double> grid;   // uniform on [−1, 1]
    std::vector<double> g;      // optimal g on the grid
    std::size_t iterations = 0;
};

/// ½ sup{∫A_beta g dν : ‖g‖_∞ ≤ 2/N, ‖g′‖_∞ ≤ 2+N} over continuous
/// piecewise-linear g on a uniform grid with `cells` cells, solved as a
/// linear program. ν must be supported in [−1, 1].
BetaDiscrepancy beta_discrepancy(const QuadratureMeasure& nu, double N, int cells = 200);

/// Constants attached to the generalized Cauchy target μ_N^−, N < −1.
struct CauchyConstants {
    double N = 0.0;
    double C_N = 0.0;        // ∫(1+t²)^{N/2} dt
    double Z_minus = 0.0;    // ∫(1+t²)^{N/2−1} dt
    double L_lemma = 0.0;    // max((4|N|+3)/(N(N+1)), (9/2)(N/(N+1))² + N/(N+1))
    double L_theorem = 0.0;  // same with first argument (4N+3)/(|N|(N+1))
    double K = 0.0;          // 1 + (3/2 + N/(N+1))·N/(N+1)
};
CauchyConstants cauchy_constants(double N);

struct SteinSolution {
    std::vector<double> grid;
    std::vector<double> g;
    std::vector<double> dg;
    std::vector<double> q;   // CDF of μ_N^− on the grid
    double residual = 0.0;   // max |A g − (h − ∫h dμ)| on interior smooth stencils
    double sup_g = 0.0;
    double sup_dg = 0.0;
    double h_mean = 0.0;     // ∫h dμ_N^−
    CauchyConstants constants;
};

/// Solves (1+x²)g′ + Nxg = h − ∫h dμ_N^− with the tail-integral solution,
/// left representation for x ≤ 0 and right representation for x > 0.
/// Integrals are taken in the angle variable; `knots` are the points where
/// h may fail to be smooth. The residual uses finite differences in
/// θ = arctan x, skipping stencils that straddle a knot.
SteinSolution cauchy_stein_solve(const ScalarFunction& h, std::span<const double> knots, double N,
                                 std::span<const double> grid);

/// Grid uniform in θ = arctan x (n points, open interval) merged with the knots.
std::vector<double> cauchy_stein_grid(int n, std::span<const double> knots = {});

/// Continuous piecewise-linear function, constant outside its knots.
struct PiecewiseLinear {
    std::vector<double> knots;
    std::vector<double> values;

    [[nodiscard]] double operator()(double x) const;
    [[nodiscard]] double lipschitz() const;
};

/// Random h with 8–64 uniform knots on [−radius, radius] and slopes in [−1, 1].
PiecewiseLinear random_lipschitz(std::uint64_t seed, double radius = 5.0);

struct SteinAuditRow {
    std::size_t sample = 0;
    std::uint64_t seed = 0;
    double lipschitz = 0.0;
    double sup_g = 0.0;
    double sup_dg = 0.0;
    double residual = 0.0;
};

struct SteinAudit {
    double N = 0.0;
    std::uint64_t seed = 0;
    double max_g_ratio = 0.0;
    double max_gprime_ratio = 0.0;
    std::size_t violations = 0;  // samples exceeding L_N (lemma form) or K_N
    CauchyConstants constants;
    std::vector<SteinAuditRow> rows;
};

SteinAudit stein_bound_audit(double N, std::size_t samples, std::uint64_t seed, int grid_points = 2001);

struct TailMargin {
    std::string name;
    double min_margin = 0.0;  // min over the grid of RHS − LHS
    double arg_min = 0.0;
    std::size_t points = 0;
};

/// The four tail inequalities for μ_N^− and the (1+t²)^{N/2} law, each on
/// the grid points inside its domain.
std::vector<TailMargin> tail_bound_audit(double N, std::span<const double> grid);
/// Symmetric grid of `count` nonzero points, uniform in arctan x.
std::vector<double> tail_audit_grid(int count);

/// Explicit constants, each present only where it is defined.
struct ConstantsRecord {
    double N = 0.0;
    std::optional<double> C_prop34;       // ‖g‖₁ ≤ C‖Lg‖₁ for centered g
    std::optional<double> B_sobolev;      // 4N/((N+1)(N−1)²)
    std::optional<double> C_ultra;        // (2 + 2N/(N−1)²)^{(N+1)/2}
    std::optional<double> lemma32_C;      // ‖Γ+(1+ε)f²−1‖₁ ≤ Cε
    std::optional<double> class_sup;      // 2/N
    std::optional<double> class_lip;      // 2 + N
    std::optional<double> thm_beta_const; // N²/4 + 5N/4 + 2
    std::optional<double> C_end;          // W₁ ≤ C_end ε end to end
    std::optional<double> Z_plus;         // ∫(1−x²)^{N/2−1} dx
    std::optional<double> lem51_factor;   // 4(1−N)²/|N|
    std::optional<CauchyConstants> cauchy;
};

ConstantsRecord constants_for(double N);
/// key = value lines, 17 significant digits, absent entries omitted.
std::string describe(const ConstantsRecord& record);

}  // namespace gapstab
