#pragma once

// Finite-volume discretization of −L and its low spectrum.

#include <memory>
#include <span>
#include <vector>

#include "gapstab/models.hpp"
#include "gapstab/tridiagonal.hpp"

namespace gapstab {

/// Cell-centered divergence-form discretization of −L.
///
/// Cells are uniform in the mapped coordinate u (x = tan u for
/// tan_compactify). Node x_i is the μ-centroid of its cell, mass w_i is the
/// exact μ-mass of the cell and c_{i+1/2} = φ m(x_{i+1/2}) / (x_{i+1} − x_i),
/// so affine functions are transported without error.
struct DiscreteOperator {
    std::shared_ptr<const DiffusionModel> model;
    Mapping mapping;
    std::vector<double> nodes;        // x_i, ascending
    std::vector<double> edges;        // n + 1 cell boundaries in x (may be ±∞)
    std::vector<double> mass;         // w_i, probability masses (sum to 1)
    std::vector<double> conductance;  // n + 1 entries, zero at both ends
    Tridiagonal matrix;               // W^{-1/2} K W^{-1/2}

    // Per-cell probability quadrature, cell i uses [cell_offset[i], cell_offset[i+1]).
    std::vector<std::size_t> cell_offset;
    std::vector<double> cell_nodes;
    std::vector<double> cell_weights;

    [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }

    /// (−L f)_i for nodal values f.
    [[nodiscard]] std::vector<double> apply(std::span<const double> f) const;
    /// Discrete Dirichlet form Σ c (f_{i+1} − f_i)².
    [[nodiscard]] double dirichlet_form(std::span<const double> f) const;
    /// Σ w_i f_i g_i.
    [[nodiscard]] double inner(std::span<const double> f, std::span<const double> g) const;
};

DiscreteOperator discretize(const DiffusionModel& model, int n, const Mapping& mapping);
DiscreteOperator discretize(const DiffusionModel& model, int n);

/// Nodal field reconstructed on the cell quadrature points by local
/// quadratic interpolation (exact for quadratics).
struct CellField {
    std::vector<double> value;
    std::vector<double> slope;
};
CellField reconstruct(const DiscreteOperator& op, std::span<const double> f);
/// ∫ g dμ over the cell quadrature.
double cell_integral(const DiscreteOperator& op, std::span<const double> g);
/// Values of f reconstructed at the n + 1 cell edges (ends extrapolated).
std::vector<double> edge_values(const DiscreteOperator& op, std::span<const double> f);

struct SpectralDecomposition {
    std::shared_ptr<const DiscreteOperator> op;
    std::vector<double> values;                // k lowest eigenvalues of −L
    std::vector<std::vector<double>> vectors;  // nodal, orthonormal in L²(μ)
    std::vector<double> residuals;             // ‖(−L)v − λv‖_{L²(μ)}
    std::vector<double> spectrum;              // all n eigenvalues, ascending

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    /// First eigenvalue not carried as a mode (∞ if all are).
    [[nodiscard]] double cutoff_value() const;
};

/// k lowest eigenpairs. Eigenvalues are Rayleigh quotients of the
/// inverse-iteration vectors evaluated through the Dirichlet form.
SpectralDecomposition eigen_lowest(const DiscreteOperator& op, int k);

/// Richardson-extrapolated k lowest eigenvalues from resolutions n/2 and n.
std::vector<double> extrapolated_eigenvalues(const DiffusionModel& model, int n, const Mapping& mapping,
                                             int k);

struct GapResult {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::vector<double> f;  // normalized eigenfunction on the nodes
    double gamma_mass = 0.0;
    bool near_degenerate = false;
};

/// λ₁ and its eigenfunction scaled so ∫Γ(f)dμ = N/(N+1) (or 1 for N = ∞),
/// sign chosen with ∫x f dμ ≥ 0.
GapResult spectral_gap(const SpectralDecomposition& dec);
GapResult spectral_gap(const DiscreteOperator& op);

/// Target value of ∫Γ(f)dμ under the normalization convention.
double gamma_normalization(Dimension dim);

struct SemigroupResult {
    std::vector<double> values;
    double remainder_norm = 0.0;  // ‖f − projection‖_{L²(μ)}
    double error_bound = 0.0;     // e^{−λ_k t}·remainder_norm
};
SemigroupResult semigroup_apply(const SpectralDecomposition& dec, double t, std::span<const double> f);

struct UltracontractivityRow {
    double t = 0.0;
    double sup_kernel_bound = 0.0;
    double theory_bound = 0.0;
    double tail = 0.0;
    bool flagged = false;
};
std::vector<UltracontractivityRow> ultracontractivity_probe(const SpectralDecomposition& dec,
                                                            std::span<const double> times);

}  // namespace gapstab
