#include "gapstab/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gapstab {

LinearProgram::LinearProgram(std::size_t m, std::size_t n)
    : rows(m),
      cols(n),
      A(m * n, 0.0),
      b(m, 0.0),
      c(n, 0.0),
      lower(n, 0.0),
      upper(n, std::numeric_limits<double>::infinity()) {}

namespace {

constexpr double kTol = 1e-9;

enum class Where : char { basic, at_lower, at_upper };

struct Tableau {
    std::size_t m = 0;
    std::size_t n = 0;          // structural + artificial
    std::vector<double> T;      // m × n, B⁻¹A
    std::vector<double> xb;     // basic values
    std::vector<std::size_t> basis;
    std::vector<Where> where;
    std::vector<double> lo, hi, value;

    double& t(std::size_t i, std::size_t j) { return T[i * n + j]; }

    void pivot(std::size_t r, std::size_t e) {
        const double p = t(r, e);
        for (std::size_t j = 0; j < n; ++j) t(r, j) /= p;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == r) continue;
            const double f = t(i, e);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) t(i, j) -= f * t(r, j);
        }
    }

    // One simplex run for cost vector c. Returns status; iterations are added to `iters`.
    LpStatus run(const std::vector<double>& c, std::size_t max_iter, std::size_t& iters) {
        for (;;) {
            if (iters >= max_iter) return LpStatus::iteration_limit;
            // Reduced costs d_j = c_j − c_Bᵀ T_j; entering by smallest index.
            std::size_t enter = n;
            double dir = 0.0;
            for (std::size_t j = 0; j < n && enter == n; ++j) {
                if (where[j] == Where::basic || hi[j] - lo[j] <= 0.0) continue;
                double d = c[j];
                for (std::size_t i = 0; i < m; ++i) d -= c[basis[i]] * T[i * n + j];
                if (where[j] == Where::at_lower && d < -kTol) {
                    enter = j;
                    dir = 1.0;
                } else if (where[j] == Where::at_upper && d > kTol) {
                    enter = j;
                    dir = -1.0;
                }
            }
            if (enter == n) return LpStatus::optimal;
            ++iters;

            // Ratio test: x_B(i) moves by −dir·T_ie·θ.
            double theta = hi[enter] - lo[enter];
            std::size_t leave = m;
            std::size_t leave_var = std::numeric_limits<std::size_t>::max();
            bool leave_to_upper = false;
            for (std::size_t i = 0; i < m; ++i) {
                const double rate = -dir * T[i * n + enter];
                if (std::abs(rate) <= kTol) continue;
                const std::size_t bv = basis[i];
                double lim;
                bool to_upper;
                if (rate < 0.0) {
                    if (!std::isfinite(lo[bv])) continue;
                    lim = (xb[i] - lo[bv]) / -rate;
                    to_upper = false;
                } else {
                    if (!std::isfinite(hi[bv])) continue;
                    lim = (hi[bv] - xb[i]) / rate;
                    to_upper = true;
                }
                if (lim < 0.0) lim = 0.0;
                const bool better = lim < theta - kTol;
                const bool tie_wins = lim <= theta + kTol && leave != m && bv < leave_var;
                if (better || tie_wins) {
                    theta = std::min(theta, lim);
                    leave = i;
                    leave_var = bv;
                    leave_to_upper = to_upper;
                }
            }
            if (!std::isfinite(theta)) return LpStatus::unbounded;

            const double step = dir * theta;
            for (std::size_t i = 0; i < m; ++i) xb[i] -= T[i * n + enter] * step;
            if (leave == m) {
                // Bound flip of the entering variable.
                where[enter] = dir > 0.0 ? Where::at_upper : Where::at_lower;
                value[enter] = dir > 0.0 ? hi[enter] : lo[enter];
                continue;
            }
            const double entering_value = value[enter] + step;
            const std::size_t out = basis[leave];
            where[out] = leave_to_upper ? Where::at_upper : Where::at_lower;
            value[out] = leave_to_upper ? hi[out] : lo[out];
            pivot(leave, enter);
            basis[leave] = enter;
            where[enter] = Where::basic;
            xb[leave] = entering_value;
        }
    }
};

}  // namespace

LpResult solve_bounded_simplex(const LinearProgram& lp, std::size_t max_iterations) {
    const std::size_t m = lp.rows;
    const std::size_t ns = lp.cols;
    if (lp.A.size() != m * ns || lp.b.size() != m || lp.c.size() != ns || lp.lower.size() != ns ||
        lp.upper.size() != ns)
        throw std::invalid_argument("solve_bounded_simplex: inconsistent dimensions");
    for (std::size_t j = 0; j < ns; ++j) {
        if (lp.lower[j] > lp.upper[j]) {
            LpResult r;
            r.status = LpStatus::infeasible;
            return r;
        }
        if (!std::isfinite(lp.lower[j]) && !std::isfinite(lp.upper[j]))
            throw std::invalid_argument("solve_bounded_simplex: free variables are not supported");
    }

    Tableau tb;
    tb.m = m;
    tb.n = ns + m;
    tb.T.assign(m * tb.n, 0.0);
    tb.xb.assign(m, 0.0);
    tb.basis.resize(m);
    tb.where.assign(tb.n, Where::at_lower);
    tb.lo.assign(tb.n, 0.0);
    tb.hi.assign(tb.n, std::numeric_limits<double>::infinity());
    tb.value.assign(tb.n, 0.0);
    for (std::size_t j = 0; j < ns; ++j) {
        tb.lo[j] = lp.lower[j];
        tb.hi[j] = lp.upper[j];
        if (std::isfinite(lp.lower[j])) {
            tb.where[j] = Where::at_lower;
            tb.value[j] = lp.lower[j];
        } else {
            tb.where[j] = Where::at_upper;
            tb.value[j] = lp.upper[j];
        }
    }
    // Artificials absorb the residual of the initial nonbasic point.
    for (std::size_t i = 0; i < m; ++i) {
        double r = lp.b[i];
        for (std::size_t j = 0; j < ns; ++j) r -= lp.A[i * ns + j] * tb.value[j];
        const double sign = r < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < ns; ++j) tb.t(i, j) = sign * lp.A[i * ns + j];
        tb.t(i, ns + i) = 1.0;
        tb.xb[i] = std::abs(r);
        tb.basis[i] = ns + i;
        tb.where[ns + i] = Where::basic;
    }

    LpResult result;
    std::vector<double> phase1(tb.n, 0.0);
    for (std::size_t i = 0; i < m; ++i) phase1[ns + i] = 1.0;
    LpStatus st = tb.run(phase1, max_iterations, result.iterations);
    if (st == LpStatus::iteration_limit) {
        result.status = st;
        return result;
    }
    double infeas = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        if (tb.basis[i] >= ns) infeas += tb.xb[i];
    double scale = 1.0;
    for (double v : lp.b) scale = std::max(scale, std::abs(v));
    if (infeas > 1e-8 * scale) {
        result.status = LpStatus::infeasible;
        return result;
    }
    // Freeze artificials at zero for phase II.
    for (std::size_t i = 0; i < m; ++i) {
        tb.hi[ns + i] = 0.0;
        if (tb.where[ns + i] != Where::basic) {
            tb.where[ns + i] = Where::at_lower;
            tb.value[ns + i] = 0.0;
        }
    }
    std::vector<double> cost(tb.n, 0.0);
    for (std::size_t j = 0; j < ns; ++j) cost[j] = lp.c[j];
    st = tb.run(cost, max_iterations, result.iterations);
    result.status = st;

    std::vector<double> x(tb.n);
    for (std::size_t j = 0; j < tb.n; ++j) x[j] = tb.value[j];
    for (std::size_t i = 0; i < m; ++i) x[tb.basis[i]] = tb.xb[i];
    x.resize(ns);
    result.objective = 0.0;
    for (std::size_t j = 0; j < ns; ++j) result.objective += lp.c[j] * x[j];
    result.x = std::move(x);
    return result;
}

}  // namespace gapstab
