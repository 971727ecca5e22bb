#include "gapstab/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "gapstab/numerics.hpp"

namespace gapstab {

std::vector<double> Tridiagonal::multiply(std::span<const double> x) const {
    const std::size_t n = diag.size();
    if (x.size() != n) throw std::invalid_argument("Tridiagonal::multiply: size mismatch");
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * x[i];
        if (i > 0) s += off[i - 1] * x[i - 1];
        if (i + 1 < n) s += off[i] * x[i + 1];
        y[i] = s;
    }
    return y;
}

double Tridiagonal::norm_inf() const {
    const std::size_t n = diag.size();
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = std::abs(diag[i]);
        if (i > 0) s += std::abs(off[i - 1]);
        if (i + 1 < n) s += std::abs(off[i]);
        best = std::max(best, s);
    }
    return best;
}

namespace {

void check_shape(const Tridiagonal& t) {
    if (t.diag.empty()) throw std::invalid_argument("tridiagonal: empty matrix");
    if (t.off.size() + 1 != t.diag.size())
        throw std::invalid_argument("tridiagonal: off-diagonal must have n-1 entries");
}

// Implicit QL on (d, e) with e[n-1] = 0 as workspace. When z is non-null the
// rotations are accumulated into the n×n row-major matrix z.
void ql_implicit(std::vector<double>& d, std::vector<double>& e, std::vector<double>* z,
                 int max_sweeps) {
    const int n = static_cast<int>(d.size());
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m = l;
        for (;;) {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m == l) break;
            if (++iter > max_sweeps)
                throw ConvergenceError("tridiagonal QL: no convergence", std::abs(e[l]));
            // Wilkinson-type shift from the leading 2×2 block.
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            int i = m - 1;
            for (; i >= l; --i) {
                double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if (z) {
                    auto& zz = *z;
                    for (int k = 0; k < n; ++k) {
                        f = zz[k * n + i + 1];
                        zz[k * n + i + 1] = s * zz[k * n + i] + c * f;
                        zz[k * n + i] = c * zz[k * n + i] - s * f;
                    }
                }
            }
            if (r == 0.0 && i >= l) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

}  // namespace

std::vector<double> tridiagonal_eigenvalues(const Tridiagonal& t, int max_sweeps) {
    check_shape(t);
    std::vector<double> d = t.diag;
    std::vector<double> e = t.off;
    e.push_back(0.0);
    ql_implicit(d, e, nullptr, max_sweeps);
    std::sort(d.begin(), d.end());
    return d;
}

TridiagonalEigensystem tridiagonal_eigensystem(const Tridiagonal& t, int max_sweeps) {
    check_shape(t);
    const std::size_t n = t.size();
    std::vector<double> d = t.diag;
    std::vector<double> e = t.off;
    e.push_back(0.0);
    std::vector<double> z(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) z[i * n + i] = 1.0;
    ql_implicit(d, e, &z, max_sweeps);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    TridiagonalEigensystem out;
    out.values.reserve(n);
    out.vectors.reserve(n);
    for (std::size_t k : order) {
        out.values.push_back(d[k]);
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = z[i * n + k];
        out.vectors.push_back(std::move(v));
    }
    return out;
}

namespace {

// Pivoted LU of a shifted tridiagonal matrix; U has two super-diagonals.
struct TridiagonalLU {
    std::vector<double> u0, u1, u2;  // diagonal, first and second super-diagonal of U
    std::vector<double> mult;        // multipliers of L
    std::vector<char> swapped;       // row i and i+1 exchanged at step i

    TridiagonalLU(const Tridiagonal& t, double shift) {
        const std::size_t n = t.size();
        const double tiny = std::numeric_limits<double>::epsilon() * std::max(t.norm_inf(), 1e-300);
        u0.assign(n, 0.0);
        u1.assign(n, 0.0);
        u2.assign(n, 0.0);
        mult.assign(n, 0.0);
        swapped.assign(n, 0);
        // Pending row i after elimination has entries in columns i and i+1 only.
        double p0 = t.diag[0] - shift;
        double p1 = n > 1 ? t.off[0] : 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            // Untouched row i+1 in columns i, i+1, i+2.
            const double q0 = t.off[i];
            const double q1 = t.diag[i + 1] - shift;
            const double q2 = i + 2 < n ? t.off[i + 1] : 0.0;
            double piv0 = p0, piv1 = p1, piv2 = 0.0;
            double oth0 = q0, oth1 = q1, oth2 = q2;
            if (std::abs(q0) > std::abs(p0)) {
                swapped[i] = 1;
                piv0 = q0;
                piv1 = q1;
                piv2 = q2;
                oth0 = p0;
                oth1 = p1;
                oth2 = 0.0;
            }
            if (piv0 == 0.0) piv0 = tiny;
            const double l = oth0 / piv0;
            mult[i] = l;
            u0[i] = piv0;
            u1[i] = piv1;
            u2[i] = piv2;
            p0 = oth1 - l * piv1;
            p1 = oth2 - l * piv2;
        }
        if (p0 == 0.0) p0 = tiny;
        u0[n - 1] = p0;
    }

    void solve(std::vector<double>& b) const {
        const std::size_t n = b.size();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (swapped[i]) std::swap(b[i], b[i + 1]);
            b[i + 1] -= mult[i] * b[i];
        }
        for (std::size_t i = n; i-- > 0;) {
            double s = b[i];
            if (i + 1 < n) s -= u1[i] * b[i + 1];
            if (i + 2 < n) s -= u2[i] * b[i + 2];
            b[i] = s / u0[i];
        }
    }
};

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

std::vector<double> inverse_iteration(const Tridiagonal& t, double shift,
                                      std::span<const std::vector<double>> previous, int iterations) {
    check_shape(t);
    const std::size_t n = t.size();
    const TridiagonalLU lu(t, shift);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.37 * std::sin(1.7 * static_cast<double>(i) + 0.3);
    auto orthogonalize = [&](std::vector<double>& x) {
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : previous) {
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += q[i] * x[i];
                for (std::size_t i = 0; i < n; ++i) x[i] -= dot * q[i];
            }
        }
    };
    orthogonalize(v);
    double nv = norm2(v);
    for (double& x : v) x /= nv;
    for (int it = 0; it < iterations; ++it) {
        lu.solve(v);
        orthogonalize(v);
        nv = norm2(v);
        if (!(nv > 0.0) || !std::isfinite(nv))
            throw ConvergenceError("inverse iteration: breakdown", nv);
        for (double& x : v) x /= nv;
    }
    return v;
}

}  // namespace gapstab
