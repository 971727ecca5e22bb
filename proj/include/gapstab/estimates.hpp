#pragma once

// Eigenfunction deficits and audits of the L¹ functional inequalities.

#include <span>
#include <vector>

#include "gapstab/models.hpp"
#include "gapstab/spectral.hpp"

namespace gapstab {

/// Family gap the stability statements compare against: N for N > 1,
/// 1 for N = ∞ and |N| for N < −1.
double family_gap(Dimension regime);

/// Deficit quantities of the first eigenfunction in one dimension regime.
///   N > 1 : h = Γ(f) + (1+ε)f², constant 1
///   N = ∞ : h = Γ(f) + εf²,     constant 1+ε
///   N < −1: h = Γ(f) + (ε−1)f², Stein quantity ‖Γ(f) − f² − 1‖₁
struct DeficitReport {
    double N = 0.0;            // regime dimension (∞ allowed)
    double lambda1 = 0.0;
    double eps = 0.0;          // λ₁ − family_gap
    std::vector<double> f;     // eigenfunction normalized to ∫Γ(f) = N/(N+1) (1 for N = ∞)
    std::vector<double> h;     // nodal h
    double mean_h = 0.0;
    double target = 0.0;       // constant h is compared with
    double deficit_l1 = 0.0;   // ‖h − target‖₁ (N < −1: ‖Γ − f² − 1‖₁)
    double centered_l1 = 0.0;  // ‖h − mean_h‖₁
    double stein_l1 = 0.0;     // ‖Γ+f²−1‖₁, ‖Γ+εf²−1−ε‖₁ or ‖Γ−f²−1‖₁
    double lh_l1 = 0.0;        // ‖Lh‖₁
    double f2_l1 = 0.0;        // ‖f²‖₁
    double gamma_l1 = 0.0;     // ∫Γ(f)
    double bound_rhs = 0.0;    // 4Nε‖f²‖₁, 4ε‖f²‖₁ or 4ε(1−N)²/|N|·‖f²‖₁
    double identity_error = 0.0;  // |∫f² − ∫Γ(f)/λ₁|
    bool lichnerowicz_fault = false;
};

/// Uses mode 1 of `dec`; the regime defaults to the model's own dimension.
DeficitReport eigen_deficit(const SpectralDecomposition& dec, Dimension regime);
DeficitReport eigen_deficit(const SpectralDecomposition& dec);

enum class L1Regime { prop34, lemma41 };

struct L1Audit {
    double lhs = 0.0;       // ‖g‖₁
    double lg_l1 = 0.0;     // ‖Lg‖₁
    double gp = 0.0;        // ‖g‖_p (lemma41 only)
    double constant = 0.0;  // C_prop34(N), or 1 for lemma41
    double rhs = 0.0;
    double ratio = 0.0;     // lhs / rhs
};

/// prop34: rhs = C_prop34(N)‖Lg‖₁ with `param` = N.
/// lemma41: rhs = ‖Lg‖₁(1 + log max(‖g‖_p/‖Lg‖₁, 1)) with `param` = p; the
/// constant is not explicit, so ratio is the observed normalizer.
L1Audit l1_spectral_inequality_audit(const DiscreteOperator& op, std::span<const double> g, L1Regime regime,
                                     double param);

struct DecayRow {
    double t = 0.0;
    double norm = 0.0;      // ‖P_t g‖_p
    double envelope = 0.0;  // C_p e^{−4(p−1)t/p²}‖g‖_p
    bool within = true;
};
struct DecayTable {
    double p = 0.0;
    double rate = 0.0;  // 4(p−1)/p²
    double C_p = 0.0;   // smallest constant valid on all sampled times
    std::vector<DecayRow> rows;
};
DecayTable hypercontractive_decay_check(const SpectralDecomposition& dec, std::span<const double> g, double p,
                                        std::span<const double> times);

struct LpUpgradeAudit {
    double exponent = 0.0;  // 2(1+2c)/(1+c)
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};
/// Poincaré-based integrability upgrade with C_P = 1/λ₁, on the model quadrature.
LpUpgradeAudit lp_upgrade_audit(const DiffusionModel& model, const ScalarFunction& g, const ScalarFunction& dg,
                                double c, double lambda1);

struct CounterexampleRecord {
    double r = 0.0;
    double l1_f = 0.0;         // ‖f_r‖_{L¹(γ)}
    double l1_Lf = 0.0;        // ‖Lf_r‖_{L¹(γ)} by quadrature of the generator
    double l1_Lf_exact = 0.0;  // 2(1 − Φ(r))
    double ratio = 0.0;        // l1_f / l1_Lf_exact
};
/// Antisymmetric solution of f″ − xf′ = 1_{[r,∞)} − 1_{(−∞,−r]}.
CounterexampleRecord ou_counterexample(double r);
/// f_r′(x) for x ≥ 0.
double ou_counterexample_derivative(double r, double x);

}  // namespace gapstab
