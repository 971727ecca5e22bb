#pragma once

// Dense bounded-variable primal simplex for small linear programs.

#include <cstddef>
#include <vector>

namespace gapstab {

/// minimize cᵀx subject to A x = b and lower ≤ x ≤ upper.
/// Every variable needs at least one finite bound.
struct LinearProgram {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> A;  // rows × cols, row-major
    std::vector<double> b;
    std::vector<double> c;
    std::vector<double> lower;
    std::vector<double> upper;

    LinearProgram() = default;
    LinearProgram(std::size_t m, std::size_t n);
    double& at(std::size_t i, std::size_t j) { return A[i * cols + j]; }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
    LpStatus status = LpStatus::iteration_limit;
    double objective = 0.0;
    std::vector<double> x;
    std::size_t iterations = 0;
};

/// Two-phase tableau simplex with Bland's anti-cycling rule. Nonbasic
/// variables sit at one of their bounds; phase I minimizes the sum of
/// artificial variables.
LpResult solve_bounded_simplex(const LinearProgram& lp, std::size_t max_iterations = 200000);

}  // namespace gapstab
