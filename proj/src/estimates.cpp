#include "gapstab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gapstab/numerics.hpp"
#include "gapstab/stein.hpp"

namespace gapstab {

double family_gap(Dimension regime) {
    if (regime.is_infinite()) return 1.0;
    const double N = regime.value();
    if (N > 1.0) return N;
    if (N < -1.0) return -N;
    throw std::domain_error("family_gap: dimension must be > 1, < -1 or infinite");
}

DeficitReport eigen_deficit(const SpectralDecomposition& dec) {
    return eigen_deficit(dec, dec.op->model->dimension());
}

DeficitReport eigen_deficit(const SpectralDecomposition& dec, Dimension regime) {
    if (dec.size() < 2) throw std::invalid_argument("eigen_deficit: decomposition needs mode 1");
    const DiscreteOperator& op = *dec.op;
    const DiffusionModel& model = *op.model;
    const std::size_t n = op.size();
    const double gap = family_gap(regime);

    DeficitReport r;
    r.N = regime.is_infinite() ? std::numeric_limits<double>::infinity() : regime.value();
    r.lambda1 = dec.values[1];
    // Stability statements need ε ≤ 1; more than 10% below the gap means a wrong mode.
    if (r.lambda1 < 0.9 * gap || r.lambda1 > gap + std::max(1.0, 0.1 * gap))
        throw std::domain_error("eigen_deficit: lambda1 is not close to the family gap");
    r.eps = r.lambda1 - gap;
    r.lichnerowicz_fault = r.eps < -1e-8 * gap;
    const double eps = r.eps;

    // Normalize ∫Γ(f) under the regime convention.
    r.f = dec.vectors[1];
    CellField cf = reconstruct(op, r.f);
    std::vector<double> phiq(cf.value.size());
    for (std::size_t q = 0; q < phiq.size(); ++q) phiq[q] = model.phi(op.cell_nodes[q]).value;
    std::vector<double> tmp(cf.value.size());
    for (std::size_t q = 0; q < tmp.size(); ++q) tmp[q] = phiq[q] * cf.slope[q] * cf.slope[q];
    const double raw_gamma = cell_integral(op, tmp);
    const double s = std::sqrt(gamma_normalization(regime) / raw_gamma);
    for (double& v : r.f) v *= s;
    for (std::size_t q = 0; q < tmp.size(); ++q) {
        cf.value[q] *= s;
        cf.slope[q] *= s;
    }

    double coef = 0.0, target = 1.0;
    if (regime.is_infinite()) {
        coef = eps;
        target = 1.0 + eps;
    } else if (r.N > 1.0) {
        coef = 1.0 + eps;
    } else {
        coef = eps - 1.0;
    }
    r.target = target;

    std::vector<double> gq(tmp.size()), f2q(tmp.size()), hq(tmp.size());
    for (std::size_t q = 0; q < tmp.size(); ++q) {
        gq[q] = phiq[q] * cf.slope[q] * cf.slope[q];
        f2q[q] = cf.value[q] * cf.value[q];
        hq[q] = gq[q] + coef * f2q[q];
    }
    r.gamma_l1 = cell_integral(op, gq);
    r.f2_l1 = cell_integral(op, f2q);
    r.mean_h = cell_integral(op, hq);
    r.identity_error = std::abs(r.f2_l1 - r.gamma_l1 / r.lambda1);

    auto l1 = [&](auto&& fn) {
        for (std::size_t q = 0; q < tmp.size(); ++q) tmp[q] = std::abs(fn(q));
        return cell_integral(op, tmp);
    };
    r.centered_l1 = l1([&](std::size_t q) { return hq[q] - r.mean_h; });
    if (regime.is_infinite()) {
        r.stein_l1 = l1([&](std::size_t q) { return gq[q] + eps * f2q[q] - 1.0 - eps; });
        r.deficit_l1 = r.stein_l1;
        r.bound_rhs = 4.0 * eps * r.f2_l1;
    } else if (r.N > 1.0) {
        r.stein_l1 = l1([&](std::size_t q) { return gq[q] + f2q[q] - 1.0; });
        r.deficit_l1 = l1([&](std::size_t q) { return hq[q] - 1.0; });
        r.bound_rhs = 4.0 * r.N * eps * r.f2_l1;
    } else {
        r.stein_l1 = l1([&](std::size_t q) { return gq[q] - f2q[q] - 1.0; });
        r.deficit_l1 = r.stein_l1;
        r.bound_rhs = 4.0 * eps * (1.0 - r.N) * (1.0 - r.N) / std::abs(r.N) * r.f2_l1;
    }

    // Nodal h with Γ from five-point derivatives; Lh from the discrete operator.
    const NodalDerivatives d = differentiate(op.nodes, r.f);
    r.h.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        r.h[i] = model.phi(op.nodes[i]).value * d.d1[i] * d.d1[i] + coef * r.f[i] * r.f[i];
    const std::vector<double> lh = op.apply(r.h);
    r.lh_l1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) r.lh_l1 += op.mass[i] * std::abs(lh[i]);
    return r;
}

L1Audit l1_spectral_inequality_audit(const DiscreteOperator& op, std::span<const double> g, L1Regime regime,
                                     double param) {
    const std::size_t n = op.size();
    if (g.size() != n) throw std::invalid_argument("l1_spectral_inequality_audit: size mismatch");
    double mean = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean += op.mass[i] * g[i];
        scale = std::max(scale, std::abs(g[i]));
    }
    if (std::abs(mean) > 1e-10 * std::max(1.0, scale))
        throw std::invalid_argument("l1_spectral_inequality_audit: g must be centered");
    L1Audit a;
    const std::vector<double> lg = op.apply(g);
    for (std::size_t i = 0; i < n; ++i) {
        a.lhs += op.mass[i] * std::abs(g[i]);
        a.lg_l1 += op.mass[i] * std::abs(lg[i]);
    }
    if (!(a.lg_l1 > 0.0)) {
        if (a.lhs > 0.0) throw std::domain_error("l1_spectral_inequality_audit: Lg = 0 with g != 0");
        return a;
    }
    if (regime == L1Regime::prop34) {
        const ConstantsRecord c = constants_for(param);
        if (!c.C_prop34) throw std::domain_error("l1_spectral_inequality_audit: prop34 needs N > 1");
        a.constant = *c.C_prop34;
        a.rhs = a.constant * a.lg_l1;
    } else {
        const double p = param;
        if (!(p > 1.0)) throw std::domain_error("l1_spectral_inequality_audit: lemma41 needs p > 1");
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += op.mass[i] * std::pow(std::abs(g[i]), p);
        a.gp = std::pow(s, 1.0 / p);
        a.constant = 1.0;
        a.rhs = a.lg_l1 * (1.0 + std::log(std::max(a.gp / a.lg_l1, 1.0)));
    }
    a.ratio = a.lhs / a.rhs;
    return a;
}

DecayTable hypercontractive_decay_check(const SpectralDecomposition& dec, std::span<const double> g, double p,
                                        std::span<const double> times) {
    if (!(p > 1.0)) throw std::domain_error("hypercontractive_decay_check: needs p > 1");
    if (dec.size() < 2 || dec.values[1] < 1.0 - 1e-8)
        throw std::domain_error("hypercontractive_decay_check: spectral gap must be >= 1");
    const DiscreteOperator& op = *dec.op;
    auto norm_p = [&](std::span<const double> v) {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += op.mass[i] * std::pow(std::abs(v[i]), p);
        return std::pow(s, 1.0 / p);
    };
    DecayTable t;
    t.p = p;
    t.rate = 4.0 * (p - 1.0) / (p * p);
    const double g0 = norm_p(g);
    for (double tt : times) {
        DecayRow row;
        row.t = tt;
        row.norm = norm_p(semigroup_apply(dec, tt, g).values);
        t.rows.push_back(row);
    }
    t.C_p = 0.0;
    for (const auto& row : t.rows)
        t.C_p = std::max(t.C_p, row.norm / (std::exp(-t.rate * row.t) * g0));
    for (auto& row : t.rows) {
        row.envelope = t.C_p * std::exp(-t.rate * row.t) * g0;
        row.within = row.norm <= row.envelope * (1.0 + 1e-12);
    }
    return t;
}

LpUpgradeAudit lp_upgrade_audit(const DiffusionModel& model, const ScalarFunction& g, const ScalarFunction& dg,
                                double c, double lambda1) {
    if (!(c > 0.0)) throw std::domain_error("lp_upgrade_audit: needs c > 0");
    if (!(lambda1 > 0.0)) throw std::domain_error("lp_upgrade_audit: needs lambda1 > 0");
    const QuadratureRule rule = model.quadrature(96);
    const double q = 2.0 * (1.0 + 2.0 * c) / (1.0 + c);
    double gq = 0.0, g2 = 0.0, gam = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const double x = rule.nodes[k];
        const double w = rule.weights[k];
        const double v = std::abs(g(x));
        const double d = dg(x);
        gq += w * std::pow(v, q);
        g2 += w * v * v;
        gam += w * std::pow(model.phi(x).value * d * d, 1.0 + c);
    }
    LpUpgradeAudit a;
    a.exponent = q;
    a.lhs = gq;
    const double g2n = std::sqrt(g2);
    a.rhs = std::pow(g2n, q) + 4.0 / lambda1 * std::pow(gam, 1.0 / (1.0 + c)) * std::pow(g2n, 2.0 * c / (1.0 + c));
    a.pass = a.lhs <= a.rhs + 1e-10;
    return a;
}

double ou_counterexample_derivative(double r, double x) {
    if (x < 0.0) return ou_counterexample_derivative(r, -x);
    if (x <= r) return -mills_ratio(r) * std::exp(0.5 * (x * x - r * r));
    return -mills_ratio(x);
}

namespace {

// Composite Gauss–Legendre on [a, b] with `panels` equal panels.
double composite(const ScalarFunction& f, double a, double b, int panels) {
    if (b <= a) return 0.0;
    const QuadratureRule unit = gauss_legendre(10);
    const double w = (b - a) / panels;
    double s = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + w * p;
        for (std::size_t k = 0; k < unit.size(); ++k)
            s += 0.5 * w * unit.weights[k] * f(lo + 0.5 * w * (unit.nodes[k] + 1.0));
    }
    return s;
}

}  // namespace

CounterexampleRecord ou_counterexample(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::domain_error("ou_counterexample: needs r > 0");
    CounterexampleRecord rec;
    rec.r = r;
    const double tail_r = 0.5 * std::erfc(r / std::sqrt(2.0));
    rec.l1_Lf_exact = 2.0 * tail_r;

    // ∫|f|dγ = 2∫₀^∞ |f′(t)|(1 − Φ(t)) dt, with (1 − Φ) = M·φ.
    const double mr = mills_ratio(r);
    const double inner = composite([](double t) { return mills_ratio(t); }, 0.0, r, 400);
    const double span = 20.0;
    const int tail_panels = 400;
    const double outer = composite(
        [](double t) {
            const double m = mills_ratio(t);
            return m * m * normal_pdf(t);
        },
        r, r + span, tail_panels);
    rec.l1_f = 2.0 * (mr * normal_pdf(r) * inner + outer);

    // Lf = f″ − x f′ evaluated from the closed-form derivatives.
    auto lf = [mr, r](double x) {
        if (x < r) {
            const double e = std::exp(0.5 * (x * x - r * r));
            const double d1 = -mr * e;
            const double d2 = -mr * x * e;
            return d2 - x * d1;
        }
        const double m = mills_ratio(x);
        return (1.0 - x * m) + x * m;
    };
    const double lf_inner = composite([&](double x) { return std::abs(lf(x)) * normal_pdf(x); }, 0.0, r, 400);
    const double lf_outer =
        composite([&](double x) { return std::abs(lf(x)) * normal_pdf(x); }, r, r + span, tail_panels);
    rec.l1_Lf = 2.0 * (lf_inner + lf_outer);
    rec.ratio = rec.l1_f / rec.l1_Lf_exact;
    return rec;
}

}  // namespace gapstab
