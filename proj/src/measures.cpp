#include "gapstab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "gapstab/models.hpp"
#include "gapstab/spectral.hpp"

namespace gapstab {

namespace bm = boost::math;

TargetDistribution TargetDistribution::beta(double N) {
    if (!(N > 1.0) || !std::isfinite(N)) throw std::invalid_argument("beta target requires N > 1");
    TargetDistribution t;
    t.family_ = TargetFamily::beta;
    t.n_ = N;
    t.z_ = std::pow(2.0, N - 1.0) * bm::beta(0.5 * N, 0.5 * N);
    return t;
}

TargetDistribution TargetDistribution::gauss() {
    TargetDistribution t;
    t.family_ = TargetFamily::gauss;
    t.n_ = std::numeric_limits<double>::infinity();
    t.z_ = std::sqrt(2.0 * std::numbers::pi);
    return t;
}

TargetDistribution TargetDistribution::cauchy(double N) {
    if (!(N < -1.0) || !std::isfinite(N))
        throw std::invalid_argument("cauchy target requires N < -1 (first moment diverges otherwise)");
    TargetDistribution t;
    t.family_ = TargetFamily::cauchy;
    t.n_ = N;
    t.z_ = bm::beta(0.5, 0.5 * (1.0 - N));
    return t;
}

std::string TargetDistribution::name() const {
    char buf[64];
    switch (family_) {
        case TargetFamily::beta: std::snprintf(buf, sizeof buf, "beta(%g)", n_); return buf;
        case TargetFamily::gauss: return "gauss";
        case TargetFamily::cauchy: std::snprintf(buf, sizeof buf, "cauchy(%g)", n_); return buf;
    }
    return "unknown";
}

double TargetDistribution::lower() const noexcept {
    return family_ == TargetFamily::beta ? -1.0 : -std::numeric_limits<double>::infinity();
}

double TargetDistribution::upper() const noexcept {
    return family_ == TargetFamily::beta ? 1.0 : std::numeric_limits<double>::infinity();
}

double TargetDistribution::pdf(double x) const {
    switch (family_) {
        case TargetFamily::beta:
            if (!(x > -1.0 && x < 1.0)) return 0.0;
            return std::pow(1.0 - x * x, 0.5 * n_ - 1.0) / z_;
        case TargetFamily::gauss: return normal_pdf(x);
        case TargetFamily::cauchy: return std::pow(1.0 + x * x, 0.5 * n_ - 1.0) / z_;
    }
    return 0.0;
}

double TargetDistribution::cdf(double x) const {
    switch (family_) {
        case TargetFamily::beta:
            if (x <= -1.0) return 0.0;
            if (x >= 1.0) return 1.0;
            if (x > 0.0) return bm::ibetac(0.5 * n_, 0.5 * n_, 0.5 * (1.0 - x)) ;
            return bm::ibeta(0.5 * n_, 0.5 * n_, 0.5 * (1.0 + x));
        case TargetFamily::gauss: return normal_cdf(x);
        case TargetFamily::cauchy: {
            if (x == 0.0) return 0.5;
            const double z = 1.0 / (1.0 + x * x);
            const double tail = 0.5 * bm::ibeta(0.5 * (1.0 - n_), 0.5, z);
            return x < 0.0 ? tail : 1.0 - tail;
        }
    }
    return 0.0;
}

double TargetDistribution::quantile(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("quantile: u must lie in [0, 1]");
    switch (family_) {
        case TargetFamily::beta:
            if (u == 0.0) return -1.0;
            if (u == 1.0) return 1.0;
            if (u > 0.5) return -quantile(1.0 - u);
            return 2.0 * bm::ibeta_inv(0.5 * n_, 0.5 * n_, u) - 1.0;
        case TargetFamily::gauss:
            if (u == 0.0) return -std::numeric_limits<double>::infinity();
            if (u == 1.0) return std::numeric_limits<double>::infinity();
            return -std::numbers::sqrt2 * bm::erfc_inv(2.0 * u);
        case TargetFamily::cauchy: {
            if (u == 0.0) return -std::numeric_limits<double>::infinity();
            if (u == 1.0) return std::numeric_limits<double>::infinity();
            if (u == 0.5) return 0.0;
            if (u > 0.5) return -quantile(1.0 - u);
            const double z = bm::ibeta_inv(0.5 * (1.0 - n_), 0.5, 2.0 * u);
            return -std::sqrt((1.0 - z) / z);
        }
    }
    return 0.0;
}

double TargetDistribution::partial_mean(double a) const {
    switch (family_) {
        case TargetFamily::beta:
            if (!(a > -1.0 && a < 1.0)) return 0.0;
            return -std::pow(1.0 - a * a, 0.5 * n_) / (n_ * z_);
        case TargetFamily::gauss: return -normal_pdf(a);
        case TargetFamily::cauchy: return std::pow(1.0 + a * a, 0.5 * n_) / (n_ * z_);
    }
    return 0.0;
}

QuadratureMeasure QuadratureMeasure::from_atoms(std::vector<double> points, std::vector<double> weights) {
    if (points.size() != weights.size()) throw std::invalid_argument("from_atoms: size mismatch");
    if (points.empty()) throw std::invalid_argument("from_atoms: empty measure");
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
    QuadratureMeasure m;
    double total = 0.0;
    for (std::size_t k : order) {
        const double x = points[k], w = weights[k];
        if (!std::isfinite(x)) throw std::invalid_argument("from_atoms: non-finite support point");
        if (w < 0.0 || !std::isfinite(w)) throw std::invalid_argument("from_atoms: negative or non-finite weight");
        if (w == 0.0) continue;
        total += w;
        if (!m.points_.empty()) {
            const double y = m.points_.back();
            if (x == y || std::abs(x - y) <= 1e-13 * std::max(std::abs(x), std::abs(y))) {
                m.weights_.back() += w;
                continue;
            }
        }
        m.points_.push_back(x);
        m.weights_.push_back(w);
    }
    if (!(total > 0.0)) throw std::invalid_argument("from_atoms: total mass must be positive");
    for (double& w : m.weights_) w /= total;
    return m;
}

QuadratureMeasure QuadratureMeasure::from_pieces(std::vector<Piece> pieces) {
    std::vector<double> pts, wts;
    double total = 0.0;
    std::vector<Piece> kept;
    kept.reserve(pieces.size());
    const double g = 0.5 / std::numbers::sqrt3;
    for (Piece p : pieces) {
        if (p.mass < 0.0 || !std::isfinite(p.mass)) throw std::invalid_argument("from_pieces: bad mass");
        if (p.mass == 0.0) continue;
        if (p.hi < p.lo) std::swap(p.lo, p.hi);
        if (!std::isfinite(p.lo) || !std::isfinite(p.hi)) throw std::invalid_argument("from_pieces: unbounded piece");
        total += p.mass;
        kept.push_back(p);
        if (p.hi == p.lo) {
            pts.push_back(p.lo);
            wts.push_back(p.mass);
        } else {
            const double mid = 0.5 * (p.lo + p.hi), len = p.hi - p.lo;
            pts.push_back(mid - g * len);
            wts.push_back(0.5 * p.mass);
            pts.push_back(mid + g * len);
            wts.push_back(0.5 * p.mass);
        }
    }
    QuadratureMeasure m = from_atoms(std::move(pts), std::move(wts));
    for (Piece& p : kept) p.mass /= total;
    std::sort(kept.begin(), kept.end(), [](const Piece& a, const Piece& b) { return a.lo < b.lo; });
    m.pieces_ = std::move(kept);
    return m;
}

double QuadratureMeasure::integrate(const ScalarFunction& f) const {
    double s = 0.0;
    for (std::size_t j = 0; j < points_.size(); ++j) s += weights_[j] * f(points_[j]);
    return s;
}

double QuadratureMeasure::mean() const {
    double s = 0.0;
    for (std::size_t j = 0; j < points_.size(); ++j) s += weights_[j] * points_[j];
    return s;
}

namespace {

// Piecewise-linear distribution function with jumps. On (x[k], x[k+1]) F is
// linear from fr[k] to fl[k+1]; sl/sr hold the survival function 1 − F
// accumulated from the right so that far right tails keep relative accuracy.
struct Profile {
    std::vector<double> x, fl, fr, sl, sr;

    static Profile build(const QuadratureMeasure& m) {
        std::vector<Piece> pieces = m.pieces();
        if (pieces.empty()) {
            pieces.reserve(m.size());
            for (std::size_t j = 0; j < m.size(); ++j) pieces.push_back({m.points()[j], m.points()[j], m.weights()[j]});
        }
        std::vector<double> bps;
        bps.reserve(2 * pieces.size());
        for (const Piece& p : pieces) {
            bps.push_back(p.lo);
            bps.push_back(p.hi);
        }
        std::sort(bps.begin(), bps.end());
        bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
        const std::size_t k = bps.size();
        std::vector<double> jump(k, 0.0), seg(k, 0.0);  // seg[j]: mass on (x_j, x_{j+1})
        for (const Piece& p : pieces) {
            const std::size_t a = std::lower_bound(bps.begin(), bps.end(), p.lo) - bps.begin();
            if (p.hi == p.lo) {
                jump[a] += p.mass;
                continue;
            }
            const std::size_t b = std::lower_bound(bps.begin(), bps.end(), p.hi) - bps.begin();
            const double dens = p.mass / (p.hi - p.lo);
            for (std::size_t j = a; j < b; ++j) seg[j] += dens * (bps[j + 1] - bps[j]);
        }
        Profile pr;
        pr.x = bps;
        pr.fl.resize(k);
        pr.fr.resize(k);
        pr.sl.resize(k);
        pr.sr.resize(k);
        double f = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            pr.fl[j] = f;
            f += jump[j];
            pr.fr[j] = f;
            f += seg[j];
        }
        double s = 0.0;
        for (std::size_t j = k; j-- > 0;) {
            s += j + 1 < k ? seg[j] : 0.0;
            pr.sr[j] = s;
            s += jump[j];
            pr.sl[j] = s;
        }
        return pr;
    }

    // F (or S when survival) at t, taking the right limit if `right`.
    [[nodiscard]] double value(double t, bool right, bool survival) const {
        const auto& l = survival ? sl : fl;
        const auto& r = survival ? sr : fr;
        if (t < x.front()) return survival ? 1.0 : 0.0;
        if (t > x.back()) return survival ? 0.0 : 1.0;
        const std::size_t j = std::upper_bound(x.begin(), x.end(), t) - x.begin();  // x[j-1] <= t < x[j]
        const std::size_t i = j - 1;
        if (t == x[i]) return right ? r[i] : l[i];
        const double a = r[i], b = l[j];
        return a + (b - a) * (t - x[i]) / (x[j] - x[i]);
    }
};

double abs_linear_integral(double d0, double d1, double len) {
    if ((d0 >= 0.0 && d1 >= 0.0) || (d0 <= 0.0 && d1 <= 0.0)) return 0.5 * (std::abs(d0) + std::abs(d1)) * len;
    return 0.5 * (d0 * d0 + d1 * d1) / (std::abs(d0) + std::abs(d1)) * len;
}

double w1_profiles(const Profile& a, const Profile& b) {
    std::vector<double> bps(a.x);
    bps.insert(bps.end(), b.x.begin(), b.x.end());
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < bps.size(); ++j) {
        const double s0 = bps[j], s1 = bps[j + 1];
        const bool surv = 0.5 * (s0 + s1) > 0.0;
        const double d0 = a.value(s0, true, surv) - b.value(s0, true, surv);
        const double d1 = a.value(s1, false, surv) - b.value(s1, false, surv);
        total += abs_linear_integral(d0, d1, s1 - s0);
    }
    return total;
}

// Splits [a, b] into pieces whose endpoint ratio stays below 2 away from 0.
void geometric_split(double a, double b, std::vector<double>& out) {
    out.push_back(a);
    if (a < 0.0 && b > 0.0) {
        geometric_split(a, 0.0, out);
        out.pop_back();
        geometric_split(0.0, b, out);
        return;
    }
    if (a >= 0.0) {
        double c = std::max(a, 1.0);
        while (2.0 * c < b) {
            c *= 2.0;
            if (c > a) out.push_back(c);
        }
    } else {
        double c = std::min(b, -1.0);
        std::vector<double> neg;
        while (2.0 * c > a) {
            c *= 2.0;
            if (c < b) neg.push_back(c);
        }
        out.insert(out.end(), neg.rbegin(), neg.rend());
    }
    out.push_back(b);
}

double w1_profile_analytic(const Profile& p, const TargetDistribution& t) {
    std::vector<double> bps(p.x);
    if (std::isfinite(t.lower()) && t.lower() > p.x.front() && t.lower() < p.x.back()) bps.push_back(t.lower());
    if (std::isfinite(t.upper()) && t.upper() > p.x.front() && t.upper() < p.x.back()) bps.push_back(t.upper());
    if (p.x.front() < 0.0 && p.x.back() > 0.0) bps.push_back(0.0);
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

    const double x0 = p.x.front(), xk = p.x.back();
    double total = 0.0;
    // Tails where the profile is 0 (left) or 1 (right).
    total += x0 * t.cdf(x0) - t.partial_mean(x0);
    total += -t.partial_mean(xk) - xk * t.cdf(-xk);

    std::vector<double> cuts;
    for (std::size_t j = 0; j + 1 < bps.size(); ++j) {
        const double a = bps[j], b = bps[j + 1];
        if (std::isfinite(t.lower()) && (b <= t.lower() || a >= t.upper())) {
            // Target has no mass here: |F_p − F| is linear.
            const bool surv = 0.5 * (a + b) > 0.0;
            const double tf = a >= t.upper() ? 1.0 : 0.0;
            const double tv = surv ? 1.0 - tf : tf;
            total += abs_linear_integral(p.value(a, true, surv) - tv, p.value(b, false, surv) - tv, b - a);
            continue;
        }
        cuts.clear();
        geometric_split(a, b, cuts);
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            const double s0 = cuts[c], s1 = cuts[c + 1];
            if (!(s1 > s0)) continue;
            const bool surv = 0.5 * (s0 + s1) > 0.0;
            const double p0 = p.value(s0, true, surv), p1 = p.value(s1, false, surv);
            auto integrand = [&](double u) {
                const double pf = p0 + (p1 - p0) * (u - s0) / (s1 - s0);
                const double tf = surv ? t.cdf(-u) : t.cdf(u);
                return std::abs(pf - tf);
            };
            total += bm::quadrature::gauss_kronrod<double, 15>::integrate(integrand, s0, s1, 3, 1e-6);
        }
    }
    return total;
}

}  // namespace

double QuadratureMeasure::cdf(double t) const {
    if (analytic_) return analytic_->cdf(t);
    return Profile::build(*this).value(t, true, false);
}

double w1_distance(const QuadratureMeasure& nu1, const QuadratureMeasure& nu2) {
    if (nu1.analytic() && nu2.analytic()) {
        const TargetDistribution a = *nu1.analytic(), b = *nu2.analytic();
        return w1_quantile([&](double u) { return a.quantile(u); }, [&](double u) { return b.quantile(u); });
    }
    if (nu1.analytic()) return w1_profile_analytic(Profile::build(nu2), *nu1.analytic());
    if (nu2.analytic()) return w1_profile_analytic(Profile::build(nu1), *nu2.analytic());
    return w1_profiles(Profile::build(nu1), Profile::build(nu2));
}

double w1_quantile(const ScalarFunction& q1, const ScalarFunction& q2, int panels) {
    const QuadratureRule rule = graded_composite_rule(0.0, 1.0, panels, 16, true, true);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double u = rule.nodes[i];
        s += rule.weights[i] * std::abs(q1(u) - q2(u));
    }
    return s;
}

QuadratureMeasure pushforward(const QuadratureMeasure& mu, std::span<const double> f) {
    if (f.size() != mu.size()) throw std::invalid_argument("pushforward: f must match the support size");
    return QuadratureMeasure::from_atoms(std::vector<double>(f.begin(), f.end()), mu.weights());
}

QuadratureMeasure grid_measure(const DiscreteOperator& op) {
    return QuadratureMeasure::from_atoms(op.nodes, op.mass);
}

QuadratureMeasure pushforward_cells(const DiscreteOperator& op, std::span<const double> f) {
    const std::size_t n = op.size();
    if (f.size() != n) throw std::invalid_argument("pushforward_cells: size mismatch");
    const std::vector<double> ev = edge_values(op, f);
    CellField cf;
    bool have_cf = false;
    std::vector<Piece> pieces;
    pieces.reserve(n + 64);
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isfinite(op.edges[i]) && std::isfinite(op.edges[i + 1])) {
            pieces.push_back({ev[i], ev[i + 1], op.mass[i]});
            continue;
        }
        if (!have_cf) {
            cf = reconstruct(op, f);
            have_cf = true;
        }
        for (std::size_t q = op.cell_offset[i]; q < op.cell_offset[i + 1]; ++q)
            pieces.push_back({cf.value[q], cf.value[q], op.cell_weights[q]});
    }
    return QuadratureMeasure::from_pieces(std::move(pieces));
}

double lp_norm(std::span<const double> f, const QuadratureMeasure& mu, double p) {
    if (f.size() != mu.size()) throw std::invalid_argument("lp_norm: f must match the support size");
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    if (std::isinf(p)) {
        double best = 0.0;
        for (double v : f) best = std::max(best, std::abs(v));
        return best;
    }
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) s += mu.weights()[j] * std::pow(std::abs(f[j]), p);
    return std::pow(s, 1.0 / p);
}

double lp_norm(const ScalarFunction& f, const QuadratureMeasure& mu, double p) {
    std::vector<double> v(mu.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(mu.points()[j]);
    return lp_norm(v, mu, p);
}

QuadratureMeasure target_measure(const TargetDistribution& target, int resolution) {
    if (resolution < 1) throw std::invalid_argument("target_measure: resolution must be positive");
    QuadratureRule rule;
    switch (target.family()) {
        case TargetFamily::beta: rule = jacobi_model(target.N()).quadrature(resolution); break;
        case TargetFamily::gauss: rule = gaussian_model(1.0).quadrature(resolution); break;
        case TargetFamily::cauchy: rule = cauchy_model(target.N()).quadrature(resolution); break;
    }
    QuadratureMeasure m = QuadratureMeasure::from_atoms(rule.nodes, rule.weights);
    m.set_analytic(target);
    return m;
}

void QuadratureMeasure::write_csv(std::ostream& os) const {
    os << "point,weight\n";
    char buf[80];
    for (std::size_t j = 0; j < points_.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", points_[j], weights_[j]);
        os << buf;
    }
}

QuadratureMeasure QuadratureMeasure::read_csv(std::istream& is) {
    std::string line;
    std::vector<double> pts, wts;
    bool first = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.find_first_not_of("0123456789+-.eE, \t") != std::string::npos) continue;  // header
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("measure csv: expected 'point,weight'");
        pts.push_back(std::stod(line.substr(0, comma)));
        wts.push_back(std::stod(line.substr(comma + 1)));
    }
    return from_atoms(std::move(pts), std::move(wts));
}

std::optional<double> w1_monotone_coupling(const DiscreteOperator& op, std::span<const double> f,
                                           const TargetDistribution& target) {
    const std::size_t n = op.size();
    if (f.size() != n) throw std::invalid_argument("w1_monotone_coupling: size mismatch");
    for (std::size_t i = 1; i < n; ++i)
        if (f[i] < f[i - 1]) return std::nullopt;
    const DiffusionModel& model = *op.model;
    auto rho = [&](double x) { return model.density(x); };

    // Prefix and suffix sums of the cell masses.
    std::vector<double> below(n + 1, 0.0), above(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) below[i + 1] = below[i] + op.mass[i];
    for (std::size_t i = n; i-- > 0;) above[i] = above[i + 1] + op.mass[i];

    // ∫ρ over [a, b] with optional grading at either end.
    auto segment = [&](double a, double b, bool grade_a, bool grade_b) {
        if (!(b > a)) return 0.0;
        const QuadratureRule rule = (grade_a || grade_b) ? graded_composite_rule(a, b, 1, 16, grade_a, grade_b)
                                                          : gauss_legendre(16, a, b);
        return rule.integrate(rho);
    };
    // ∫ρ from x to the infinite end on the side of x: x/v with v ∈ (0, 1].
    auto tail = [&](double x) {
        const QuadratureRule rule = graded_composite_rule(0.0, 1.0, 1, 16, true, false);
        double s = 0.0;
        for (std::size_t k = 0; k < rule.size(); ++k) {
            const double v = rule.nodes[k];
            s += rule.weights[k] * rho(x / v) * std::abs(x) / (v * v);
        }
        return s;
    };

    const CellField cf = reconstruct(op, f);
    double w1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double el = op.edges[i];
        const double er = op.edges[i + 1];
        const bool upper_half = below[i] >= 0.5;
        for (std::size_t q = op.cell_offset[i]; q < op.cell_offset[i + 1]; ++q) {
            const double x = op.cell_nodes[q];
            double lo_mass, hi_mass;  // μ(−∞, x] and μ[x, ∞)
            if (!upper_half) {
                const double p = std::isfinite(el) ? segment(el, x, i == 0, false) : tail(x);
                lo_mass = below[i] + p;
                hi_mass = 1.0 - lo_mass;
            } else {
                const double p = std::isfinite(er) ? segment(x, er, false, i + 1 == n) : tail(x);
                hi_mass = above[i + 1] + p;
                lo_mass = 1.0 - hi_mass;
            }
            const double t = lo_mass <= 0.5 ? target.quantile(std::max(lo_mass, 0.0))
                                            : -target.quantile(std::max(hi_mass, 0.0));
            w1 += op.cell_weights[q] * std::abs(cf.value[q] - t);
        }
    }
    return w1;
}

}  // namespace gapstab
