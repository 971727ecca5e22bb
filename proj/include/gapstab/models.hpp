#pragma once

// One-dimensional weighted diffusions L f = φ f'' + (φ'/2 − φ W') f' on an
// interval I with metric 1/φ and reversible density exp(−W) φ^(−1/2).

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gapstab/numerics.hpp"

namespace gapstab {

enum class ModelKind { jacobi, cauchy, gaussian, scaled, phi_perturbed };
enum class BumpProfile { sine, quartic };  // sin(πx) and (1 − x²)²

std::string to_string(ModelKind kind);
std::string to_string(BumpProfile bump);
ModelKind parse_model_kind(const std::string& name);
BumpProfile parse_bump_profile(const std::string& name);

struct Interval {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    [[nodiscard]] bool bounded() const noexcept { return std::isfinite(lower) && std::isfinite(upper); }
    [[nodiscard]] bool is_real_line() const noexcept {
        return std::isinf(lower) && std::isinf(upper);
    }
    [[nodiscard]] bool contains(double x) const noexcept { return x > lower && x < upper; }
};

/// Dimension parameter N of a curvature-dimension condition; N = ∞ allowed.
class Dimension {
public:
    constexpr Dimension() = default;
    constexpr explicit Dimension(double n) : value_(n) {}
    static constexpr Dimension infinite() {
        return Dimension(std::numeric_limits<double>::infinity());
    }

    [[nodiscard]] constexpr bool is_infinite() const noexcept {
        return value_ == std::numeric_limits<double>::infinity();
    }
    [[nodiscard]] constexpr double value() const noexcept { return value_; }
    [[nodiscard]] std::string str() const;

private:
    double value_ = std::numeric_limits<double>::infinity();
};

/// Coordinate change used to put a model on a uniform computational grid.
struct Mapping {
    enum class Kind { direct, tan_compactify, truncate };
    Kind kind = Kind::direct;
    double radius = 0.0;  // truncate only

    static Mapping direct() { return {Kind::direct, 0.0}; }
    static Mapping tan_compactify() { return {Kind::tan_compactify, 0.0}; }
    static Mapping truncate(double r) { return {Kind::truncate, r}; }
};

std::string to_string(const Mapping& mapping);
Mapping parse_mapping(const std::string& text);

class DiffusionModel;

struct ModelParams {
    double N = std::numeric_limits<double>::quiet_NaN();
    double kappa = 1.0;    // gaussian stiffness
    double quartic = 0.0;  // gaussian: W = κx²/2 + quartic·x⁴
    double radius = 1.0;   // scaled
    double delta = 0.0;    // phi_perturbed amplitude
    BumpProfile bump = BumpProfile::quartic;
    std::shared_ptr<const DiffusionModel> base;
};

class DiffusionModel {
public:
    [[nodiscard]] const std::string& id() const noexcept { return id_; }
    [[nodiscard]] ModelKind kind() const noexcept { return kind_; }
    [[nodiscard]] const Interval& interval() const noexcept { return interval_; }
    [[nodiscard]] Dimension dimension() const noexcept { return dimension_; }
    [[nodiscard]] double curvature() const noexcept { return curvature_; }

    /// β when the potential is W = (β − ½) log φ + V (φ^(−β) family).
    [[nodiscard]] double beta() const noexcept { return log_phi_coeff_ + 0.5; }
    [[nodiscard]] bool in_beta_family() const noexcept { return beta_family_; }
    /// Polynomial part V of the potential, coefficients in increasing degree.
    [[nodiscard]] const std::vector<double>& extra_potential() const noexcept { return extra_potential_; }

    [[nodiscard]] Jet phi(double x) const { return phi_(x); }
    [[nodiscard]] Jet potential(double x) const;
    /// Drift coefficient φ'/2 − φW' of the first-order term.
    [[nodiscard]] double drift(double x) const;
    /// log of the unnormalized density exp(−W) φ^(−1/2).
    [[nodiscard]] double log_density(double x) const;
    /// Normalized reversible density m(x)/Z.
    [[nodiscard]] double density(double x) const { return std::exp(log_density(x) - log_norm_); }
    [[nodiscard]] double norm_const() const noexcept { return std::exp(log_norm_); }
    [[nodiscard]] double log_norm() const noexcept { return log_norm_; }

    /// Spectral gap predicted by the curvature-dimension bound λ₁ ≥ Nρ/(N−1).
    [[nodiscard]] double reference_gap() const;
    [[nodiscard]] Mapping default_mapping() const;

    /// Same model, certified against a different CD(ρ, N) pair.
    [[nodiscard]] DiffusionModel with_cd(double rho, Dimension dim) const;

    /// Probability quadrature in x for the normalized density (weights sum to 1).
    [[nodiscard]] QuadratureRule quadrature(int panels = 64) const;
    [[nodiscard]] double expectation(const ScalarFunction& f, int panels = 64) const;

    /// key=value description of the model.
    [[nodiscard]] std::string describe() const;

    friend DiffusionModel make_model(ModelKind kind, const ModelParams& params);

private:
    DiffusionModel() = default;
    [[nodiscard]] QuadratureRule unnormalized_rule(int panels) const;
    void normalize();

    std::string id_;
    ModelKind kind_ = ModelKind::jacobi;
    Interval interval_;
    JetFunction phi_;
    double log_phi_coeff_ = 0.0;  // β − ½
    bool beta_family_ = false;
    std::vector<double> extra_potential_;
    Dimension dimension_;
    double curvature_ = 0.0;
    double log_norm_ = 0.0;
    double truncation_radius_ = 0.0;
};

/// Builds a catalogue model; throws std::invalid_argument on inadmissible
/// parameters.
DiffusionModel make_model(ModelKind kind, const ModelParams& params);

// Convenience constructors.
DiffusionModel jacobi_model(double N);
DiffusionModel cauchy_model(double N);
DiffusionModel gaussian_model(double kappa = 1.0, double quartic = 0.0);
DiffusionModel scaled_model(const DiffusionModel& base, double radius);
DiffusionModel phi_perturbed_model(const DiffusionModel& base, double delta, BumpProfile bump);

/// Evaluates a bump profile ψ with derivatives.
Jet bump_profile(BumpProfile bump, double x);

struct MarginReport {
    std::vector<double> grid;
    std::vector<double> margin;
    double min_margin = 0.0;
    double arg_min = 0.0;
};

/// Pointwise curvature-dimension margin
///   [W'' + W'φ'/(2φ)] − ρ/φ − (W')²/(N − 1)
/// (last term dropped for N = ∞). Nonnegative everywhere certifies CD(ρ, N).
MarginReport cd_margin(const DiffusionModel& model, double rho, Dimension dim,
                       std::span<const double> grid);

/// L f = φ f'' + (φ'/2 − φW') f' at the grid nodes, derivatives by five-point
/// finite differences.
std::vector<double> generator_apply(const DiffusionModel& model, std::span<const double> grid,
                                    std::span<const double> f);
/// Same with supplied first and second derivatives.
std::vector<double> generator_apply(const DiffusionModel& model, std::span<const double> grid,
                                    std::span<const double> f1, std::span<const double> f2);

/// Γ(f) = φ (f')².
std::vector<double> carre_du_champ(const DiffusionModel& model, std::span<const double> grid,
                                   std::span<const double> f);
std::vector<double> carre_du_champ_from_derivative(const DiffusionModel& model,
                                                   std::span<const double> grid,
                                                   std::span<const double> f1);

struct IdentityMoments {
    double variance = 0.0;
    double gamma_mass = 0.0;  // ∫ Γ(id) dμ
};
IdentityMoments identity_moments(const DiffusionModel& model);

}  // namespace gapstab
