#include "gapstab/stein.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "gapstab/simplex.hpp"

namespace gapstab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2.0;

void require_cauchy(double N, const char* who) {
    if (!(N < -1.0) || !std::isfinite(N))
        throw std::domain_error(std::string(who) + ": requires finite N < -1");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

SteinTestClass SteinTestClass::beta(double N) {
    if (!(N > 1.0)) throw std::domain_error("SteinTestClass::beta: requires N > 1");
    return {2.0 / N, 2.0 + N, TargetDistribution::beta(N)};
}

SteinTestClass SteinTestClass::gauss() { return {2.0, 4.0, TargetDistribution::gauss()}; }

SteinTestClass SteinTestClass::cauchy(double N) {
    const CauchyConstants c = cauchy_constants(N);
    return {c.L_lemma, c.K, TargetDistribution::cauchy(N)};
}

double stein_operator_apply(const TargetDistribution& target, const ScalarFunction& g,
                            const ScalarFunction& dg, const QuadratureMeasure& nu) {
    const double N = target.N();
    const auto& x = nu.points();
    const auto& w = nu.weights();
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        double a = 0.0;
        switch (target.family()) {
            case TargetFamily::beta: a = (1.0 - xi * xi) * dg(xi) - N * xi * g(xi); break;
            case TargetFamily::cauchy: a = (1.0 + xi * xi) * dg(xi) + N * xi * g(xi); break;
            case TargetFamily::gauss: a = dg(xi) - xi * g(xi); break;
        }
        s += w[i] * a;
    }
    return s;
}

BetaDiscrepancy beta_discrepancy(const QuadratureMeasure& nu, double N, int cells) {
    if (!(N > 1.0)) throw std::domain_error("beta_discrepancy: requires N > 1");
    if (cells < 2) throw std::invalid_argument("beta_discrepancy: need at least two cells");
    const std::size_t M = static_cast<std::size_t>(cells);
    const double dx = 2.0 / static_cast<double>(M);
    const double gmax = 2.0 / N;
    const double smax = 2.0 + N;

    // Variables: G_0..G_M (g = gmax·G), then S_0..S_{M−1} (g′ = smax·S), all in [−1, 1].
    LinearProgram lp(M, 2 * M + 1);
    for (std::size_t j = 0; j < lp.cols; ++j) {
        lp.lower[j] = -1.0;
        lp.upper[j] = 1.0;
    }
    const double a = gmax / (dx * smax);
    for (std::size_t j = 0; j < M; ++j) {
        lp.at(j, j + 1) = a;
        lp.at(j, j) = -a;
        lp.at(j, M + 1 + j) = -1.0;
    }
    // Objective: maximize Σ w[(1−y²)g′(y) − N y g(y)] → minimize its negative.
    const auto& pts = nu.points();
    const auto& wts = nu.weights();
    for (std::size_t k = 0; k < pts.size(); ++k) {
        double y = pts[k];
        if (y < -1.0 - 1e-12 || y > 1.0 + 1e-12)
            throw std::domain_error("beta_discrepancy: measure not supported in [-1, 1]");
        y = std::clamp(y, -1.0, 1.0);
        std::size_t j = static_cast<std::size_t>(std::floor((y + 1.0) / dx));
        if (j >= M) j = M - 1;
        const double t = (y - (-1.0 + dx * static_cast<double>(j))) / dx;
        const double w = wts[k];
        lp.c[M + 1 + j] -= w * (1.0 - y * y) * smax;
        lp.c[j] -= w * (-N * y * (1.0 - t)) * gmax;
        lp.c[j + 1] -= w * (-N * y * t) * gmax;
    }
    const LpResult res = solve_bounded_simplex(lp);
    if (res.status != LpStatus::optimal)
        throw ConvergenceError("beta_discrepancy: linear program did not reach optimality",
                               static_cast<double>(res.iterations));
    BetaDiscrepancy out;
    out.value = 0.5 * -res.objective;
    out.iterations = res.iterations;
    out.grid.resize(M + 1);
    out.g.resize(M + 1);
    for (std::size_t i = 0; i <= M; ++i) {
        out.grid[i] = -1.0 + dx * static_cast<double>(i);
        out.g[i] = gmax * res.x[i];
    }
    return out;
}

CauchyConstants cauchy_constants(double N) {
    require_cauchy(N, "cauchy_constants");
    CauchyConstants c;
    c.N = N;
    c.C_N = boost::math::beta(0.5, -(N + 1.0) / 2.0);
    c.Z_minus = boost::math::beta(0.5, (1.0 - N) / 2.0);
    const double r = N / (N + 1.0);
    const double second = 4.5 * r * r + r;
    c.L_lemma = std::max((4.0 * std::abs(N) + 3.0) / (N * (N + 1.0)), second);
    c.L_theorem = std::max((4.0 * N + 3.0) / (std::abs(N) * (N + 1.0)), second);
    c.K = 1.0 + (1.5 + r) * r;
    return c;
}

namespace {

// Cumulative integrals on one half of the line in the variable s ∈ (0, π/2],
// x = ∓cot s (left half uses the minus sign).
struct HalfIntegrals {
    std::vector<double> s;   // breakpoints, ascending, s[0] = 0, back() = π/2
    std::vector<double> J;   // ∫₀^s sin^a σ · h(x(σ)) dσ
    std::vector<double> K;   // ∫₀^s sin^a σ dσ

    [[nodiscard]] std::size_t index(double v) const {
        auto it = std::lower_bound(s.begin(), s.end(), v);
        if (it == s.end() || *it != v) throw std::logic_error("cauchy_stein_solve: breakpoint lookup");
        return static_cast<std::size_t>(it - s.begin());
    }
};

// s-coordinate of x on its own half: x ≤ 0 → left, x > 0 → right.
double half_coordinate(double x) { return x <= 0.0 ? std::atan2(1.0, -x) : std::atan2(1.0, x); }

HalfIntegrals half_integrals(const ScalarFunction& h, double a, bool left, std::vector<double> s) {
    s.push_back(0.0);
    s.push_back(kHalfPi);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    const QuadratureRule unit = gauss_legendre(10);
    HalfIntegrals out;
    out.s = s;
    out.J.assign(s.size(), 0.0);
    out.K.assign(s.size(), 0.0);
    auto accumulate = [&](const QuadratureRule& rule, double& J, double& K) {
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double sig = rule.nodes[q];
            const double sa = std::pow(std::sin(sig), a);
            const double x = (left ? -1.0 : 1.0) * std::cos(sig) / std::sin(sig);
            J += rule.weights[q] * sa * h(x);
            K += rule.weights[q] * sa;
        }
    };
    constexpr double max_width = 0.02;
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        const double lo = s[k];
        const double hi = s[k + 1];
        double J = 0.0, K = 0.0;
        if (lo == 0.0) {
            accumulate(graded_composite_rule(lo, hi, 1, 20, true, false), J, K);
        } else {
            const int pieces = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_width)));
            const double w = (hi - lo) / pieces;
            for (int p = 0; p < pieces; ++p) {
                const double a0 = lo + w * p;
                const double b0 = p + 1 == pieces ? hi : a0 + w;
                QuadratureRule rule = unit;
                for (std::size_t q = 0; q < rule.size(); ++q) {
                    rule.nodes[q] = 0.5 * (a0 + b0) + 0.5 * (b0 - a0) * unit.nodes[q];
                    rule.weights[q] = 0.5 * (b0 - a0) * unit.weights[q];
                }
                accumulate(rule, J, K);
            }
        }
        out.J[k + 1] = out.J[k] + J;
        out.K[k + 1] = out.K[k] + K;
    }
    return out;
}

}  // namespace

SteinSolution cauchy_stein_solve(const ScalarFunction& h, std::span<const double> knots, double N,
                                 std::span<const double> grid) {
    require_cauchy(N, "cauchy_stein_solve");
    if (grid.size() < 5) throw std::invalid_argument("cauchy_stein_solve: grid needs at least 5 points");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i])) throw std::invalid_argument("cauchy_stein_solve: grid must be finite");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw std::invalid_argument("cauchy_stein_solve: grid must be strictly increasing");
    }
    const double a = -N;
    std::vector<double> sl, sr;
    auto add = [&](double x) { (x <= 0.0 ? sl : sr).push_back(half_coordinate(x)); };
    for (double x : grid) add(x);
    for (double k : knots) add(k);
    const HalfIntegrals L = half_integrals(h, a, true, sl);
    const HalfIntegrals R = half_integrals(h, a, false, sr);

    const double mean = (L.J.back() + R.J.back()) / (L.K.back() + R.K.back());

    SteinSolution sol;
    sol.constants = cauchy_constants(N);
    sol.h_mean = mean;
    sol.grid.assign(grid.begin(), grid.end());
    const std::size_t n = grid.size();
    sol.g.resize(n);
    sol.dg.resize(n);
    sol.q.resize(n);
    const TargetDistribution law = TargetDistribution::cauchy(N);
    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid[i];
        const double s = half_coordinate(x);
        const double sa = std::pow(std::sin(s), a);
        double g;
        if (x <= 0.0) {
            const std::size_t k = L.index(s);
            g = (L.J[k] - mean * L.K[k]) / sa;
        } else {
            const std::size_t k = R.index(s);
            g = -(R.J[k] - mean * R.K[k]) / sa;
        }
        centered[i] = h(x) - mean;
        sol.g[i] = g;
        sol.dg[i] = (centered[i] - N * x * g) / (1.0 + x * x);
        sol.q[i] = law.cdf(x);
        sol.sup_g = std::max(sol.sup_g, std::abs(g));
        sol.sup_dg = std::max(sol.sup_dg, std::abs(sol.dg[i]));
    }

    // (1+x²)g′ = dg/dθ, differentiated on the θ grid.
    std::vector<double> theta(n);
    for (std::size_t i = 0; i < n; ++i) theta[i] = std::atan(grid[i]);
    const NodalDerivatives d = differentiate(theta, sol.g);
    std::vector<double> sorted_knots(knots.begin(), knots.end());
    std::sort(sorted_knots.begin(), sorted_knots.end());
    for (std::size_t i = 2; i + 2 < n; ++i) {
        const double lo = grid[i - 2];
        const double hi = grid[i + 2];
        auto it = std::upper_bound(sorted_knots.begin(), sorted_knots.end(), lo);
        if (it != sorted_knots.end() && *it < hi) continue;
        const double r = std::abs(d.d1[i] + N * grid[i] * sol.g[i] - centered[i]);
        sol.residual = std::max(sol.residual, r);
    }
    return sol;
}

std::vector<double> cauchy_stein_grid(int n, std::span<const double> knots) {
    if (n < 5) throw std::invalid_argument("cauchy_stein_grid: need at least 5 points");
    std::vector<double> x;
    x.reserve(static_cast<std::size_t>(n) + knots.size());
    for (int k = 0; k < n; ++k) {
        const double th = -kHalfPi + kPi * (k + 0.5) / n;
        x.push_back(2 * k + 1 == n ? 0.0 : std::tan(th));
    }
    x.insert(x.end(), knots.begin(), knots.end());
    std::sort(x.begin(), x.end());
    x.erase(std::unique(x.begin(), x.end()), x.end());
    return x;
}

double PiecewiseLinear::operator()(double x) const {
    if (knots.empty()) return 0.0;
    if (x <= knots.front()) return values.front();
    if (x >= knots.back()) return values.back();
    const auto it = std::upper_bound(knots.begin(), knots.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - knots.begin());
    const double t = (x - knots[j - 1]) / (knots[j] - knots[j - 1]);
    return values[j - 1] + t * (values[j] - values[j - 1]);
}

double PiecewiseLinear::lipschitz() const {
    double m = 0.0;
    for (std::size_t j = 1; j < knots.size(); ++j)
        m = std::max(m, std::abs(values[j] - values[j - 1]) / (knots[j] - knots[j - 1]));
    return m;
}

PiecewiseLinear random_lipschitz(std::uint64_t seed, double radius) {
    std::mt19937_64 rng(seed);
    const int count = 8 + static_cast<int>(rng() % 57);
    PiecewiseLinear h;
    h.knots.resize(static_cast<std::size_t>(count));
    for (double& k : h.knots) k = uniform(rng, -radius, radius);
    std::sort(h.knots.begin(), h.knots.end());
    h.knots.erase(std::unique(h.knots.begin(), h.knots.end()), h.knots.end());
    h.values.assign(h.knots.size(), 0.0);
    for (std::size_t j = 1; j < h.knots.size(); ++j)
        h.values[j] = h.values[j - 1] + uniform(rng, -1.0, 1.0) * (h.knots[j] - h.knots[j - 1]);
    return h;
}

SteinAudit stein_bound_audit(double N, std::size_t samples, std::uint64_t seed, int grid_points) {
    require_cauchy(N, "stein_bound_audit");
    if (samples == 0) throw std::invalid_argument("stein_bound_audit: need at least one sample");
    SteinAudit audit;
    audit.N = N;
    audit.seed = seed;
    audit.constants = cauchy_constants(N);
    for (std::size_t i = 0; i < samples; ++i) {
        const std::uint64_t s = splitmix64(seed + i);
        const PiecewiseLinear h = random_lipschitz(s);
        const std::vector<double> grid = cauchy_stein_grid(grid_points, h.knots);
        const SteinSolution sol = cauchy_stein_solve(std::cref(h), h.knots, N, grid);
        SteinAuditRow row;
        row.sample = i;
        row.seed = s;
        row.lipschitz = h.lipschitz();
        row.sup_g = sol.sup_g;
        row.sup_dg = sol.sup_dg;
        row.residual = sol.residual;
        if (row.lipschitz > 0.0) {
            const double rg = row.sup_g / row.lipschitz;
            const double rd = row.sup_dg / row.lipschitz;
            audit.max_g_ratio = std::max(audit.max_g_ratio, rg);
            audit.max_gprime_ratio = std::max(audit.max_gprime_ratio, rd);
            if (rg > audit.constants.L_lemma || rd > audit.constants.K) ++audit.violations;
        }
        audit.rows.push_back(row);
    }
    return audit;
}

std::vector<TailMargin> tail_bound_audit(double N, std::span<const double> grid) {
    const CauchyConstants c = cauchy_constants(N);
    const TargetDistribution law = TargetDistribution::cauchy(N);
    const double nu = -1.0 - N;
    const boost::math::students_t_distribution<double> student(nu);
    // ∫_{−∞}^x (1+t²)^{N/2} dt / C_N for x ≤ 0.
    auto weighted_cdf = [&](double x) { return boost::math::cdf(student, x * std::sqrt(nu)); };

    std::vector<TailMargin> out(4);
    out[0].name = "left_tail";
    out[1].name = "right_tail";
    out[2].name = "weighted_half";
    out[3].name = "weighted_decay";
    for (auto& m : out) m.min_margin = std::numeric_limits<double>::infinity();
    auto record = [](TailMargin& m, double x, double margin) {
        ++m.points;
        if (margin < m.min_margin) {
            m.min_margin = margin;
            m.arg_min = x;
        }
    };
    for (double x : grid) {
        const double p = 1.0 + x * x;
        if (x < 0.0) {
            const double rhs = std::min(0.5, 1.0 / std::abs(N * c.Z_minus * x)) * std::pow(p, N / 2.0);
            record(out[0], x, rhs - law.cdf(x));
            const double lhs4 = weighted_cdf(x);
            record(out[3], x, std::pow(p, N / 2.0 + 1.0) / ((N + 1.0) * c.C_N * x) - lhs4);
        }
        if (x > 0.0) {
            const double rhs = std::min(0.5, 1.0 / std::abs(N * c.Z_minus * x)) * std::pow(p, N / 2.0);
            record(out[1], x, rhs - law.cdf(-x));
        }
        if (x <= 0.0) record(out[2], x, 0.5 * std::pow(p, N / 2.0 + 1.0) - weighted_cdf(x));
    }
    return out;
}

std::vector<double> tail_audit_grid(int count) {
    if (count < 2) throw std::invalid_argument("tail_audit_grid: need at least two points");
    std::vector<double> x;
    x.reserve(static_cast<std::size_t>(count));
    const int slots = count % 2 == 0 ? count : count + 1;
    for (int k = 0; k < slots; ++k) x.push_back(std::tan(-kHalfPi + kPi * (k + 0.5) / slots));
    if (static_cast<int>(x.size()) > count) x.erase(x.begin());
    return x;
}

ConstantsRecord constants_for(double N) {
    ConstantsRecord r;
    r.N = N;
    if (N > 1.0 && std::isfinite(N)) {
        const double u = 2.0 + 2.0 * N / ((N - 1.0) * (N - 1.0));
        const double c34 = 2.0 + (N + 1.0) / N * (2.0 / (N + 1.0) * std::log(2.0) + std::log(u));
        r.C_prop34 = c34;
        r.B_sobolev = 4.0 * N / ((N + 1.0) * (N - 1.0) * (N - 1.0));
        r.C_ultra = std::pow(u, (N + 1.0) / 2.0);
        const double c32 = 4.0 * c34 + (N - 1.0) / (N * (N + 1.0));
        r.lemma32_C = c32;
        r.class_sup = 2.0 / N;
        r.class_lip = 2.0 + N;
        const double kb = N * N / 4.0 + 5.0 * N / 4.0 + 2.0;
        r.thm_beta_const = kb;
        // ‖Γ+f²−1‖₁ ≤ (C + 1/(N+1))ε and ‖f‖₂ ≤ (N+1)^{−1/2}.
        r.C_end = kb * (c32 + 1.0 / (N + 1.0)) + 1.0 / (N * std::sqrt(N + 1.0));
        r.Z_plus = TargetDistribution::beta(N).norm_const();
    }
    if (N < -1.0 && std::isfinite(N)) {
        r.lem51_factor = 4.0 * (1.0 - N) * (1.0 - N) / std::abs(N);
        r.cauchy = cauchy_constants(N);
    }
    return r;
}

std::string describe(const ConstantsRecord& r) {
    std::ostringstream os;
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) os << key << " = " << fmt(*v) << '\n';
    };
    os << "N = " << fmt(r.N) << '\n';
    put("C_prop34", r.C_prop34);
    put("B_sobolev", r.B_sobolev);
    put("C_ultra", r.C_ultra);
    put("lemma32_C", r.lemma32_C);
    put("class_sup", r.class_sup);
    put("class_lip", r.class_lip);
    put("thm_beta_const", r.thm_beta_const);
    put("C_end", r.C_end);
    put("Z_plus", r.Z_plus);
    put("lem51_factor", r.lem51_factor);
    if (r.cauchy) {
        put("C_N", r.cauchy->C_N);
        put("Z_minus", r.cauchy->Z_minus);
        put("L_N_lemma", r.cauchy->L_lemma);
        put("L_N_theorem", r.cauchy->L_theorem);
        put("K_N", r.cauchy->K);
    }
    return os.str();
}

}  // namespace gapstab
