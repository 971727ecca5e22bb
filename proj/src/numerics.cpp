#include "gapstab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace gapstab {

double QuadratureRule::integrate(const ScalarFunction& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
}

QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
    QuadratureRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
    QuadratureRule rule = gauss_legendre(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        rule.nodes[i] = mid + half * rule.nodes[i];
        rule.weights[i] *= half;
    }
    return rule;
}

namespace {

void append_panel(QuadratureRule& out, const QuadratureRule& ref, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (std::size_t i = 0; i < ref.size(); ++i) {
        out.nodes.push_back(mid + half * ref.nodes[i]);
        out.weights.push_back(half * ref.weights[i]);
    }
}

}  // namespace

QuadratureRule graded_composite_rule(double a, double b, int panels, int points_per_panel,
                                     bool grade_left, bool grade_right, int levels,
                                     double ratio) {
    if (!(b > a)) throw std::invalid_argument("graded_composite_rule: empty interval");
    if (panels < 1) throw std::invalid_argument("graded_composite_rule: panels must be >= 1");
    const QuadratureRule ref = gauss_legendre(points_per_panel);
    QuadratureRule out;
    const double width = (b - a) / panels;

    // Offsets below this cannot be represented next to the endpoint.
    const double floor_left = 1e-12 * std::max(1.0, std::abs(a));
    const double floor_right = 1e-12 * std::max(1.0, std::abs(b));
    std::vector<double> breaks;
    breaks.push_back(a);
    if (grade_left) {
        for (int k = levels; k >= 1; --k) {
            const double off = width * std::pow(ratio, k);
            if (a == 0.0 || off >= floor_left) breaks.push_back(a + off);
        }
    }
    for (int p = 1; p < panels; ++p) breaks.push_back(a + width * p);
    if (grade_right) {
        for (int k = 1; k <= levels; ++k) {
            const double off = width * std::pow(ratio, k);
            if (b == 0.0 || off >= floor_right) breaks.push_back(b - off);
        }
    }
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) append_panel(out, ref, breaks[i], breaks[i + 1]);
    return out;
}

std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> nodes,
                                                  int max_order) {
    const int n = static_cast<int>(nodes.size());
    std::vector<std::vector<double>> c(max_order + 1, std::vector<double>(n, 0.0));
    double c1 = 1.0;
    double c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, max_order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

NodalDerivatives differentiate(std::span<const double> x, std::span<const double> f) {
    const std::size_t n = x.size();
    if (n != f.size()) throw std::invalid_argument("differentiate: size mismatch");
    if (n < 5) throw std::invalid_argument("differentiate: need at least 5 nodes");
    NodalDerivatives out{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t start = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(i) - 2, 0,
                                                             static_cast<std::ptrdiff_t>(n) - 5);
        const auto w = fornberg_weights(x[i], x.subspan(start, 5), 2);
        double a = 0.0, b = 0.0;
        for (std::size_t j = 0; j < 5; ++j) {
            a += w[1][j] * f[start + j];
            b += w[2][j] * f[start + j];
        }
        out.d1[i] = a;
        out.d2[i] = b;
    }
    return out;
}

double normal_cdf(double x) { return 0.5 * boost::math::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double mills_ratio(double x) {
    if (x < 8.0) {
        return 0.5 * boost::math::erfc(x / std::numbers::sqrt2) * std::exp(0.5 * x * x) *
               std::sqrt(2.0 * std::numbers::pi);
    }
    // Laplace continued fraction R = 1/(x + 1/(x + 2/(x + 3/(x + ...)))).
    double tail = x;
    for (int k = 400; k >= 1; --k) tail = x + k / tail;
    return 1.0 / tail;
}

LineFit least_squares_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || n != y.size()) throw std::invalid_argument("least_squares_line: need >= 2 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("least_squares_line: degenerate abscissae");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double a, double b) { return a + (b - a) * uniform01(rng); }

}  // namespace gapstab
