#include "gapstab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "gapstab/estimates.hpp"
#include "gapstab/spectral.hpp"
#include "gapstab/stein.hpp"

namespace gapstab {

namespace {

constexpr double kMarginTol = 1e-9;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Jacobi(N′) rescaled so that its curvature is N − 1: r² = (N′ − 1)/(N − 1).
double dim_shift_radius(double N, double Np) { return std::sqrt((Np - 1.0) / (N - 1.0)); }

// Scale c with ∫Γ(c·x) = N/(N+1) when id has ∫Γ(id) = N′/(N′+1).
double id_scale(double N, double Np) { return std::sqrt(N * (Np + 1.0) / ((N + 1.0) * Np)); }

bool is_beta(FamilyKind k) {
    return k == FamilyKind::beta_scaled || k == FamilyKind::beta_phi_perturbed || k == FamilyKind::beta_dim_shift;
}

}  // namespace

std::string to_string(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::beta_scaled: return "beta_scaled";
        case FamilyKind::beta_phi_perturbed: return "beta_phi_perturbed";
        case FamilyKind::beta_dim_shift: return "beta_dim_shift";
        case FamilyKind::gauss_stiff: return "gauss_stiff";
        case FamilyKind::gauss_quartic: return "gauss_quartic";
        case FamilyKind::cauchy_dim_shift: return "cauchy_dim_shift";
    }
    return "unknown";
}

FamilyKind parse_family_kind(const std::string& name) {
    for (FamilyKind k : {FamilyKind::beta_scaled, FamilyKind::beta_phi_perturbed, FamilyKind::beta_dim_shift,
                         FamilyKind::gauss_stiff, FamilyKind::gauss_quartic, FamilyKind::cauchy_dim_shift})
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown family: " + name);
}

Dimension family_regime(const FamilySpec& spec) {
    switch (spec.kind) {
        case FamilyKind::gauss_stiff:
        case FamilyKind::gauss_quartic: return Dimension::infinite();
        default: return Dimension(spec.N);
    }
}

double family_curvature(const FamilySpec& spec) {
    if (is_beta(spec.kind)) return spec.N - 1.0;
    if (spec.kind == FamilyKind::cauchy_dim_shift) return 1.0 - spec.N;
    return 1.0;
}

TargetDistribution family_target(const FamilySpec& spec) {
    if (is_beta(spec.kind)) return TargetDistribution::beta(spec.N);
    if (spec.kind == FamilyKind::cauchy_dim_shift) return TargetDistribution::cauchy(spec.N);
    return TargetDistribution::gauss();
}

DiffusionModel family_model(const FamilySpec& spec, double delta) {
    if (!(delta >= 0.0)) throw std::invalid_argument("family_model: delta must be >= 0");
    const double N = spec.N;
    switch (spec.kind) {
        case FamilyKind::beta_scaled:
            return scaled_model(jacobi_model(N), 1.0 - delta);
        case FamilyKind::beta_phi_perturbed:
            return phi_perturbed_model(jacobi_model(N), delta, spec.bump);
        case FamilyKind::beta_dim_shift: {
            const double Np = N - delta;
            return scaled_model(jacobi_model(Np), dim_shift_radius(N, Np));
        }
        case FamilyKind::gauss_stiff:
            return gaussian_model(1.0 + delta, 0.0);
        case FamilyKind::gauss_quartic:
            return gaussian_model(1.0, delta);
        case FamilyKind::cauchy_dim_shift:
            return cauchy_model(N - delta);
    }
    throw std::invalid_argument("family_model: unknown family");
}

std::optional<double> exact_eps(const FamilySpec& spec, double delta) {
    const double N = spec.N;
    switch (spec.kind) {
        case FamilyKind::beta_scaled: {
            const double r = 1.0 - delta;
            return N * (1.0 / (r * r) - 1.0);
        }
        case FamilyKind::beta_dim_shift: return delta / (N - delta - 1.0);
        case FamilyKind::gauss_stiff:
        case FamilyKind::cauchy_dim_shift: return delta;
        default: return std::nullopt;
    }
}

std::optional<double> exact_w1(const FamilySpec& spec, double delta) {
    const double N = spec.N;
    switch (spec.kind) {
        case FamilyKind::beta_scaled: return delta * TargetDistribution::beta(N).abs_mean();
        case FamilyKind::gauss_stiff:
            return std::abs(1.0 - 1.0 / std::sqrt(1.0 + delta)) * std::sqrt(2.0 / std::numbers::pi);
        case FamilyKind::beta_dim_shift: {
            if (delta == 0.0) return 0.0;
            const double Np = N - delta;
            const double s = id_scale(N, Np) * dim_shift_radius(N, Np);
            const TargetDistribution a = TargetDistribution::beta(Np);
            const TargetDistribution b = TargetDistribution::beta(N);
            return w1_quantile([&](double u) { return s * a.quantile(u); }, [&](double u) { return b.quantile(u); });
        }
        case FamilyKind::cauchy_dim_shift: {
            if (delta == 0.0) return 0.0;
            const double Np = N - delta;
            const double s = id_scale(N, Np);
            const TargetDistribution a = TargetDistribution::cauchy(Np);
            const TargetDistribution b = TargetDistribution::cauchy(N);
            return w1_quantile([&](double u) { return s * a.quantile(u); }, [&](double u) { return b.quantile(u); });
        }
        default: return std::nullopt;
    }
}

std::vector<double> default_deltas() { return {1e-3, 3e-3, 1e-2, 3e-2, 1e-1}; }

std::vector<double> margin_grid(const DiffusionModel& model, int points) {
    if (points < 3) throw std::invalid_argument("margin_grid: need at least 3 points");
    const Interval& I = model.interval();
    std::vector<double> x(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) {
        const double t = (k + 0.5) / points;
        if (I.bounded()) {
            x[k] = I.lower + (I.upper - I.lower) * t;
        } else {
            x[k] = std::tan(std::numbers::pi * (t - 0.5));
        }
    }
    return x;
}

bool RateTable::all_pass() const {
    if (rows.empty()) return false;
    return std::all_of(rows.begin(), rows.end(), [](const RateRow& r) { return r.pass; }) && rejected.empty();
}

void RateTable::write_csv(std::ostream& os) const {
    os << "family,delta,eps,w1,deficit_l1,thm_rhs,n,cd_margin,pass\n";
    for (const auto& r : rows) {
        os << family << ',' << fmt(r.delta) << ',' << fmt(r.eps) << ',' << fmt(r.w1) << ',' << fmt(r.deficit_l1)
           << ',' << fmt(r.thm_rhs) << ',' << r.n << ',' << fmt(r.cd_margin) << ',' << (r.pass ? "true" : "false")
           << '\n';
    }
}

RateTable run_family(const FamilySpec& spec, std::span<const double> deltas, int n) {
    RateTable table;
    table.family = to_string(spec.kind);
    table.spec = spec;
    const Dimension regime = family_regime(spec);
    const double rho = family_curvature(spec);
    const TargetDistribution target = family_target(spec);
    const QuadratureMeasure target_mu = target_measure(target);
    std::optional<CauchyConstants> cc;
    if (spec.kind == FamilyKind::cauchy_dim_shift) cc = cauchy_constants(spec.N);

    std::vector<double> sorted(deltas.begin(), deltas.end());
    std::sort(sorted.begin(), sorted.end());
    for (double delta : sorted) {
        if (!(delta > 0.0)) throw std::invalid_argument("run_family: deltas must be positive");
        DiffusionModel model = family_model(spec, delta);
        const MarginReport margin = cd_margin(model, rho, regime, margin_grid(model));
        if (margin.min_margin < -kMarginTol) {
            table.rejected.push_back({delta, margin.min_margin,
                                      "CD margin " + fmt(margin.min_margin) + " < 0 at x = " + fmt(margin.arg_min)});
            continue;
        }
        const DiscreteOperator op = discretize(model, n);
        const SpectralDecomposition dec = eigen_lowest(op, 3);
        const DeficitReport d = eigen_deficit(dec, regime);

        RateRow row;
        row.delta = delta;
        row.n = n;
        row.cd_margin = margin.min_margin;
        row.lambda1 = d.lambda1;
        row.eps = d.eps;
        row.deficit_l1 = d.deficit_l1;
        row.stein_l1 = d.stein_l1;
        row.lh_l1 = d.lh_l1;
        row.lh_bound = d.bound_rhs;
        row.f2_l1 = d.f2_l1;
        const std::optional<double> coupled = w1_monotone_coupling(op, d.f, target);
        row.w1 = coupled ? *coupled : w1_distance(pushforward_cells(op, d.f), target_mu);

        if (regime.is_infinite()) {
            row.thm_rhs = 4.0 / (1.0 + d.eps) * d.stein_l1 + 4.0 * d.eps;
        } else if (spec.N > 1.0) {
            const double N = spec.N;
            const double kb = N * N / 4.0 + 5.0 * N / 4.0 + 2.0;
            row.thm_rhs = kb * d.stein_l1 + std::abs(N - d.lambda1) / N * std::sqrt(d.f2_l1);
        } else {
            row.thm_rhs = cc->K * d.stein_l1 + std::abs(d.lambda1 + spec.N) * cc->L_lemma * d.f2_l1;
        }

        row.eps_exact = exact_eps(spec, delta);
        row.w1_exact = exact_w1(spec, delta);
        auto close = [](double a, double b) { return std::abs(a - b) <= 0.01 * std::abs(b) + 1e-12; };
        if (row.eps_exact && !close(row.eps, *row.eps_exact)) row.analytic_ok = false;
        if (row.w1_exact && !close(row.w1, *row.w1_exact)) row.analytic_ok = false;
        const bool bound_ok = row.w1 <= row.thm_rhs * (1.0 + 1e-9) + 1e-12;
        row.pass = bound_ok && row.analytic_ok && !d.lichnerowicz_fault;
        table.rows.push_back(row);
    }
    return table;
}

RateFit fit_rate(const RateTable& table, RateLaw law) {
    std::vector<double> eps, w1;
    for (const auto& r : table.rows) {
        eps.push_back(r.eps);
        w1.push_back(r.w1);
    }
    return fit_rate(eps, w1, law);
}

RateFit fit_rate(std::span<const double> eps, std::span<const double> values, RateLaw law) {
    if (eps.size() != values.size()) throw std::invalid_argument("fit_rate: size mismatch");
    if (eps.size() < 4) throw std::invalid_argument("fit_rate: need at least 4 rows");
    double lo = INFINITY, hi = 0.0;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0) || !(values[i] > 0.0))
            throw std::invalid_argument("fit_rate: degenerate table (non-positive eps or value)");
        lo = std::min(lo, eps[i]);
        hi = std::max(hi, eps[i]);
        const double e = eps[i];
        x.push_back(law == RateLaw::linear_eps ? std::log(e) : std::log(e * std::log(2.0 / e)));
        y.push_back(std::log(values[i]));
    }
    if (std::log10(hi / lo) < 1.5) throw std::invalid_argument("fit_rate: eps spans less than 1.5 decades");
    const LineFit line = least_squares_line(x, y);
    RateFit fit;
    fit.exponent = line.slope;
    fit.constant = std::exp(line.intercept);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double pred = std::exp(line.intercept + line.slope * x[i]);
        fit.residual = std::max(fit.residual, std::abs(values[i] / pred - 1.0));
    }
    return fit;
}

ConstantFit fit_eps_log_constant(std::span<const double> eps, std::span<const double> values) {
    if (eps.size() != values.size() || eps.empty())
        throw std::invalid_argument("fit_eps_log_constant: need matching non-empty inputs");
    ConstantFit c;
    c.C_min = INFINITY;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0) || !(eps[i] < 2.0)) throw std::invalid_argument("fit_eps_log_constant: eps must lie in (0, 2)");
        const double r = values[i] / (eps[i] * std::log(2.0 / eps[i]));
        c.C_fit = std::max(c.C_fit, r);
        c.C_min = std::min(c.C_min, r);
    }
    c.spread = c.C_min > 0.0 ? c.C_fit / c.C_min : INFINITY;
    return c;
}

}  // namespace gapstab
