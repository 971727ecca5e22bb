#pragma once

#include <span>
#include <vector>

namespace gapstab {

/// Symmetric tridiagonal matrix: diagonal d (size n), off-diagonal e (size n-1).
struct Tridiagonal {
    std::vector<double> diag;
    std::vector<double> off;

    [[nodiscard]] std::size_t size() const noexcept { return diag.size(); }
    [[nodiscard]] std::vector<double> multiply(std::span<const double> x) const;
    [[nodiscard]] double norm_inf() const;
};

/// All eigenvalues, ascending, by implicit QL with Wilkinson shifts.
/// Throws ConvergenceError after `max_sweeps` iterations on one eigenvalue.
std::vector<double> tridiagonal_eigenvalues(const Tridiagonal& t, int max_sweeps = 60);

struct TridiagonalEigensystem {
    std::vector<double> values;                // ascending
    std::vector<std::vector<double>> vectors;  // orthonormal columns, vectors[k][i]
};

/// Eigenvalues with eigenvectors (QL with accumulated rotations, O(n³)).
TridiagonalEigensystem tridiagonal_eigensystem(const Tridiagonal& t, int max_sweeps = 60);

/// Eigenvector for the eigenvalue nearest `shift` by inverse iteration with
/// a pivoted LU of (T - shift·I). The result is orthogonalized against
/// `previous` and has unit Euclidean norm.
std::vector<double> inverse_iteration(const Tridiagonal& t, double shift,
                                      std::span<const std::vector<double>> previous,
                                      int iterations = 4);

}  // namespace gapstab
