#pragma once

// Perturbation families, rate tables and rate fits.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gapstab/measures.hpp"
#include "gapstab/models.hpp"

namespace gapstab {

enum class FamilyKind { beta_scaled, beta_phi_perturbed, beta_dim_shift, gauss_stiff, gauss_quartic, cauchy_dim_shift };

std::string to_string(FamilyKind kind);
FamilyKind parse_family_kind(const std::string& name);

struct FamilySpec {
    FamilyKind kind = FamilyKind::beta_scaled;
    double N = 3.0;  // ignored by the Gaussian families
    BumpProfile bump = BumpProfile::quartic;
};

/// Model of the family at parameter δ.
DiffusionModel family_model(const FamilySpec& spec, double delta);
/// Dimension regime, CD curvature and target law the family is compared against.
Dimension family_regime(const FamilySpec& spec);
double family_curvature(const FamilySpec& spec);
TargetDistribution family_target(const FamilySpec& spec);

/// Closed forms where the family is an exact model (empty otherwise).
std::optional<double> exact_eps(const FamilySpec& spec, double delta);
std::optional<double> exact_w1(const FamilySpec& spec, double delta);

struct RateRow {
    double delta = 0.0;
    double lambda1 = 0.0;
    double eps = 0.0;
    double w1 = 0.0;
    double deficit_l1 = 0.0;
    double stein_l1 = 0.0;
    double lh_l1 = 0.0;
    double lh_bound = 0.0;  // Bochner-deficit bound on ‖Lh‖₁
    double f2_l1 = 0.0;
    double thm_rhs = 0.0;
    int n = 0;
    double cd_margin = 0.0;
    std::optional<double> eps_exact;
    std::optional<double> w1_exact;
    bool analytic_ok = true;  // numerics within 1% of the closed forms
    bool pass = false;        // cd ok, w1 ≤ thm_rhs and analytic_ok
};

struct RejectedRow {
    double delta = 0.0;
    double cd_margin = 0.0;
    std::string reason;
};

struct RateTable {
    std::string family;
    FamilySpec spec;
    std::vector<RateRow> rows;
    std::vector<RejectedRow> rejected;

    [[nodiscard]] bool all_pass() const;
    /// header family,delta,eps,w1,deficit_l1,thm_rhs,n,cd_margin,pass
    void write_csv(std::ostream& os) const;
};

/// {1e−3, 3e−3, 1e−2, 3e−2, 1e−1}.
std::vector<double> default_deltas();

RateTable run_family(const FamilySpec& spec, std::span<const double> deltas, int n = 2000);

enum class RateLaw { linear_eps, eps_log };

struct RateFit {
    double exponent = 0.0;  // slope of log w1 against log ε (or log(ε log(2/ε)))
    double constant = 0.0;  // exp(intercept)
    double residual = 0.0;  // max relative deviation from the fitted power law
};
/// Needs ≥ 4 rows, positive w1 and ε spanning ≥ 1.5 decades.
RateFit fit_rate(const RateTable& table, RateLaw law);
RateFit fit_rate(std::span<const double> eps, std::span<const double> values, RateLaw law);

/// Smallest C with values ≤ C·ε log(2/ε) on every row, and its spread.
struct ConstantFit {
    double C_fit = 0.0;  // max of the row ratios
    double C_min = 0.0;
    double spread = 0.0;  // C_fit / C_min
};
ConstantFit fit_eps_log_constant(std::span<const double> eps, std::span<const double> values);

/// Sample points for CD margin checks: interior uniform grid on bounded
/// intervals, uniform in arctan x on the real line.
std::vector<double> margin_grid(const DiffusionModel& model, int points = 2001);

}  // namespace gapstab
