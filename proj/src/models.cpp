#include "gapstab/models.hpp"

#include <algorithm>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace gapstab {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

Jet polynomial_jet(const std::vector<double>& c, double x) {
    Jet out;
    for (std::size_t k = c.size(); k-- > 0;) {
        out.d2 = out.d2 * x + 2.0 * out.d1;
        out.d1 = out.d1 * x + out.value;
        out.value = out.value * x + c[k];
    }
    return out;
}

// Polynomial in x/r with coefficients c.
std::vector<double> rescale_polynomial(std::vector<double> c, double r) {
    double scale = 1.0;
    for (double& ck : c) {
        ck *= scale;
        scale /= r;
    }
    return c;
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::jacobi: return "jacobi";
        case ModelKind::cauchy: return "cauchy";
        case ModelKind::gaussian: return "gaussian";
        case ModelKind::scaled: return "scaled";
        case ModelKind::phi_perturbed: return "phi_perturbed";
    }
    return "unknown";
}

std::string to_string(BumpProfile bump) {
    return bump == BumpProfile::sine ? "sine" : "quartic";
}

ModelKind parse_model_kind(const std::string& name) {
    if (name == "jacobi" || name == "beta") return ModelKind::jacobi;
    if (name == "cauchy") return ModelKind::cauchy;
    if (name == "gaussian" || name == "gauss" || name == "ou") return ModelKind::gaussian;
    if (name == "scaled") return ModelKind::scaled;
    if (name == "phi_perturbed") return ModelKind::phi_perturbed;
    throw std::invalid_argument("unknown model kind '" + name + "'");
}

BumpProfile parse_bump_profile(const std::string& name) {
    if (name == "sine" || name == "sin") return BumpProfile::sine;
    if (name == "quartic" || name == "bump") return BumpProfile::quartic;
    throw std::invalid_argument("unknown bump profile '" + name + "'");
}

std::string Dimension::str() const { return is_infinite() ? std::string("inf") : short_fmt(value_); }

std::string to_string(const Mapping& mapping) {
    switch (mapping.kind) {
        case Mapping::Kind::direct: return "direct";
        case Mapping::Kind::tan_compactify: return "tan_compactify";
        case Mapping::Kind::truncate: return "truncate(" + short_fmt(mapping.radius) + ")";
    }
    return "direct";
}

Mapping parse_mapping(const std::string& text) {
    if (text == "direct") return Mapping::direct();
    if (text == "tan_compactify" || text == "tan") return Mapping::tan_compactify();
    const std::string prefix = "truncate";
    if (text.rfind(prefix, 0) == 0) {
        std::string rest = text.substr(prefix.size());
        if (!rest.empty() && (rest.front() == '(' || rest.front() == ':' || rest.front() == '='))
            rest.erase(0, 1);
        if (!rest.empty() && rest.back() == ')') rest.pop_back();
        std::size_t used = 0;
        double r = 0.0;
        try {
            r = std::stod(rest, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != rest.size() || !(r > 0.0))
            throw std::invalid_argument("bad truncation radius in mapping '" + text + "'");
        return Mapping::truncate(r);
    }
    throw std::invalid_argument("unknown mapping '" + text + "'");
}

Jet bump_profile(BumpProfile bump, double x) {
    if (bump == BumpProfile::sine) {
        const double a = std::numbers::pi * x;
        return {std::sin(a), std::numbers::pi * std::cos(a), -std::numbers::pi * std::numbers::pi * std::sin(a)};
    }
    const double u = 1.0 - x * x;
    return {u * u, -4.0 * x * u, 12.0 * x * x - 4.0};
}

Jet DiffusionModel::potential(double x) const {
    const Jet p = phi_(x);
    const Jet v = polynomial_jet(extra_potential_, x);
    const double r = p.d1 / p.value;
    const double b = log_phi_coeff_;
    return {b * std::log(p.value) + v.value, b * r + v.d1, b * (p.d2 / p.value - r * r) + v.d2};
}

double DiffusionModel::drift(double x) const {
    const Jet p = phi_(x);
    const Jet v = polynomial_jet(extra_potential_, x);
    return p.d1 * (0.5 - log_phi_coeff_) - p.value * v.d1;
}

double DiffusionModel::log_density(double x) const {
    const Jet p = phi_(x);
    const Jet v = polynomial_jet(extra_potential_, x);
    return -beta() * std::log(p.value) - v.value;
}

double DiffusionModel::reference_gap() const {
    if (dimension_.is_infinite()) return curvature_;
    const double n = dimension_.value();
    return n * curvature_ / (n - 1.0);
}

Mapping DiffusionModel::default_mapping() const {
    if (interval_.bounded()) return Mapping::direct();
    if (truncation_radius_ > 0.0) return Mapping::truncate(truncation_radius_);
    return Mapping::tan_compactify();
}

DiffusionModel DiffusionModel::with_cd(double rho, Dimension dim) const {
    DiffusionModel copy = *this;
    copy.curvature_ = rho;
    copy.dimension_ = dim;
    return copy;
}

QuadratureRule DiffusionModel::unnormalized_rule(int panels) const {
    constexpr int points = 16;
    QuadratureRule out;
    if (interval_.bounded()) {
        const QuadratureRule base =
            graded_composite_rule(interval_.lower, interval_.upper, panels, points, true, true);
        out.nodes = base.nodes;
        out.weights.resize(base.size());
        for (std::size_t i = 0; i < base.size(); ++i)
            out.weights[i] = base.weights[i] * std::exp(log_density(base.nodes[i]));
        return out;
    }
    if (truncation_radius_ > 0.0) {
        const double r = truncation_radius_;
        const QuadratureRule base = graded_composite_rule(-r, r, panels, points, false, false);
        out.nodes = base.nodes;
        out.weights.resize(base.size());
        for (std::size_t i = 0; i < base.size(); ++i)
            out.weights[i] = base.weights[i] * std::exp(log_density(base.nodes[i]));
        return out;
    }
    // x = tan θ, parametrized by the distance s to ±π/2 so the far tails keep
    // full relative precision: x = ±cot s.
    const QuadratureRule half =
        graded_composite_rule(0.0, 0.5 * std::numbers::pi, panels / 2, points, true, false);
    out.nodes.reserve(2 * half.size());
    out.weights.reserve(2 * half.size());
    for (std::size_t i = 0; i < half.size(); ++i) {
        const double x = -1.0 / std::tan(half.nodes[i]);
        out.nodes.push_back(x);
        out.weights.push_back(half.weights[i] * std::exp(log_density(x) + std::log1p(x * x)));
    }
    for (std::size_t i = half.size(); i-- > 0;) {
        const double x = 1.0 / std::tan(half.nodes[i]);
        out.nodes.push_back(x);
        out.weights.push_back(half.weights[i] * std::exp(log_density(x) + std::log1p(x * x)));
    }
    return out;
}

void DiffusionModel::normalize() {
    const QuadratureRule rule = unnormalized_rule(64);
    double z = 0.0;
    for (double w : rule.weights) z += w;
    if (!(z > 0.0) || !std::isfinite(z))
        throw std::invalid_argument("model " + id_ + ": density is not integrable");
    log_norm_ = std::log(z);
}

QuadratureRule DiffusionModel::quadrature(int panels) const {
    QuadratureRule rule = unnormalized_rule(panels);
    const double z = norm_const();
    for (double& w : rule.weights) w /= z;
    return rule;
}

double DiffusionModel::expectation(const ScalarFunction& f, int panels) const {
    return quadrature(panels).integrate(f);
}

std::string DiffusionModel::describe() const {
    std::ostringstream os;
    os << "id = " << id_ << '\n';
    os << "kind = " << to_string(kind_) << '\n';
    os << "interval_lower = " << fmt(interval_.lower) << '\n';
    os << "interval_upper = " << fmt(interval_.upper) << '\n';
    os << "N = " << dimension_.str() << '\n';
    os << "rho = " << fmt(curvature_) << '\n';
    if (beta_family_) os << "beta = " << fmt(beta()) << '\n';
    os << "norm_const = " << fmt(norm_const()) << '\n';
    os << "reference_gap = " << fmt(reference_gap()) << '\n';
    os << "mapping = " << to_string(default_mapping()) << '\n';
    return os.str();
}

DiffusionModel make_model(ModelKind kind, const ModelParams& params) {
    DiffusionModel m;
    m.kind_ = kind;
    switch (kind) {
        case ModelKind::jacobi: {
            const double n = params.N;
            if (!(n > 1.0) || !std::isfinite(n))
                throw std::invalid_argument("jacobi model requires finite N > 1, got " + short_fmt(n));
            m.id_ = "jacobi(N=" + short_fmt(n) + ")";
            m.interval_ = {-1.0, 1.0};
            m.phi_ = [](double x) { return Jet{1.0 - x * x, -2.0 * x, -2.0}; };
            m.log_phi_coeff_ = 0.5 - 0.5 * n;
            m.beta_family_ = true;
            m.dimension_ = Dimension(n);
            m.curvature_ = n - 1.0;
            break;
        }
        case ModelKind::cauchy: {
            const double n = params.N;
            if (!(n < -1.0) || !std::isfinite(n))
                throw std::invalid_argument("cauchy model requires N < -1, got " + short_fmt(n));
            m.id_ = "cauchy(N=" + short_fmt(n) + ")";
            m.interval_ = {};
            m.phi_ = [](double x) { return Jet{1.0 + x * x, 2.0 * x, 2.0}; };
            m.log_phi_coeff_ = 0.5 - 0.5 * n;
            m.beta_family_ = true;
            m.dimension_ = Dimension(n);
            m.curvature_ = 1.0 - n;
            break;
        }
        case ModelKind::gaussian: {
            const double k = params.kappa;
            const double q = params.quartic;
            if (!(k >= 1.0) || !std::isfinite(k))
                throw std::invalid_argument("gaussian model requires stiffness kappa >= 1, got " + short_fmt(k));
            if (!(q >= 0.0) || !std::isfinite(q))
                throw std::invalid_argument("gaussian quartic coefficient must be >= 0, got " + short_fmt(q));
            m.id_ = "gaussian(kappa=" + short_fmt(k) + (q > 0.0 ? ",quartic=" + short_fmt(q) : "") + ")";
            m.interval_ = {};
            m.phi_ = [](double) { return Jet{1.0, 0.0, 0.0}; };
            m.log_phi_coeff_ = 0.0;
            m.extra_potential_ = {0.0, 0.0, 0.5 * k, 0.0, q};
            m.dimension_ = Dimension::infinite();
            m.curvature_ = k;
            // Truncate where κR²/2 + qR⁴ = 32: the neglected mass is below 1e−14.
            m.truncation_radius_ = std::sqrt(64.0 / (0.5 * k + std::sqrt(0.25 * k * k + 128.0 * q)));
            break;
        }
        case ModelKind::scaled: {
            if (!params.base) throw std::invalid_argument("scaled model requires a base model");
            const double r = params.radius;
            if (!(r > 0.0 && r <= 1.0))
                throw std::invalid_argument("scaled model requires radius in (0, 1], got " + short_fmt(r));
            const DiffusionModel& b = *params.base;
            m = b;
            m.kind_ = ModelKind::scaled;
            m.id_ = "scaled(" + b.id_ + ",r=" + short_fmt(r) + ")";
            m.interval_ = {b.interval_.lower * r, b.interval_.upper * r};
            const JetFunction base_phi = b.phi_;
            m.phi_ = [base_phi, r](double x) {
                const Jet p = base_phi(x / r);
                return Jet{p.value, p.d1 / r, p.d2 / (r * r)};
            };
            m.extra_potential_ = rescale_polynomial(b.extra_potential_, r);
            m.curvature_ = b.curvature_ / (r * r);
            m.truncation_radius_ = b.truncation_radius_ * r;
            break;
        }
        case ModelKind::phi_perturbed: {
            if (!params.base) throw std::invalid_argument("phi_perturbed model requires a base model");
            const DiffusionModel& b = *params.base;
            const double d = params.delta;
            const BumpProfile bump = params.bump;
            if (!std::isfinite(d)) throw std::invalid_argument("phi_perturbed amplitude must be finite");
            if (!b.interval_.bounded() && bump == BumpProfile::quartic && d < 0.0)
                throw std::invalid_argument("phi_perturbed: negative amplitude with the quartic bump "
                                            "destroys positivity on an unbounded interval");
            if (bump == BumpProfile::sine && !(std::abs(d) < 1.0))
                throw std::invalid_argument("phi_perturbed: |delta| >= 1 destroys positivity");
            if (bump == BumpProfile::quartic && !(d > -1.0))
                throw std::invalid_argument("phi_perturbed: delta <= -1 destroys positivity");
            {
                const double lo = b.interval_.bounded() ? b.interval_.lower : -0.5 * std::numbers::pi;
                const double hi = b.interval_.bounded() ? b.interval_.upper : 0.5 * std::numbers::pi;
                constexpr int samples = 20001;
                for (int i = 1; i < samples; ++i) {
                    const double u = lo + (hi - lo) * i / samples;
                    const double x = b.interval_.bounded() ? u : std::tan(u);
                    if (!(1.0 + d * bump_profile(bump, x).value > 0.0))
                        throw std::invalid_argument("phi_perturbed: delta = " + short_fmt(d) +
                                                    " destroys positivity of phi near x = " + short_fmt(x));
                }
            }
            m = b;
            m.kind_ = ModelKind::phi_perturbed;
            m.id_ = "phi_perturbed(" + b.id_ + ",delta=" + short_fmt(d) + ",bump=" + to_string(bump) + ")";
            const JetFunction base_phi = b.phi_;
            m.phi_ = [base_phi, d, bump](double x) {
                const Jet p = base_phi(x);
                const Jet s = bump_profile(bump, x);
                const double a = 1.0 + d * s.value;
                return Jet{p.value * a, p.d1 * a + p.value * d * s.d1,
                           p.d2 * a + 2.0 * p.d1 * d * s.d1 + p.value * d * s.d2};
            };
            break;
        }
    }
    m.normalize();
    return m;
}

DiffusionModel jacobi_model(double N) {
    ModelParams p;
    p.N = N;
    return make_model(ModelKind::jacobi, p);
}

DiffusionModel cauchy_model(double N) {
    ModelParams p;
    p.N = N;
    return make_model(ModelKind::cauchy, p);
}

DiffusionModel gaussian_model(double kappa, double quartic) {
    ModelParams p;
    p.kappa = kappa;
    p.quartic = quartic;
    return make_model(ModelKind::gaussian, p);
}

DiffusionModel scaled_model(const DiffusionModel& base, double radius) {
    ModelParams p;
    p.base = std::make_shared<const DiffusionModel>(base);
    p.radius = radius;
    return make_model(ModelKind::scaled, p);
}

DiffusionModel phi_perturbed_model(const DiffusionModel& base, double delta, BumpProfile bump) {
    ModelParams p;
    p.base = std::make_shared<const DiffusionModel>(base);
    p.delta = delta;
    p.bump = bump;
    return make_model(ModelKind::phi_perturbed, p);
}

MarginReport cd_margin(const DiffusionModel& model, double rho, Dimension dim,
                       std::span<const double> grid) {
    if (!dim.is_infinite() && dim.value() == 1.0)
        throw std::invalid_argument("cd_margin: N = 1 is not admissible");
    if (grid.empty()) throw std::invalid_argument("cd_margin: empty grid");
    MarginReport rep;
    rep.grid.assign(grid.begin(), grid.end());
    rep.margin.resize(grid.size());
    const double b = model.beta() - 0.5;
    const bool finite = !dim.is_infinite();
    const double inv = finite ? 1.0 / (dim.value() - 1.0) : 0.0;
    // W = b log φ + V expanded so the exact cancellations of the model
    // families survive rounding.
    const double quad_coeff = finite ? -b * (dim.value() + 2.0 * b - 1.0) * 0.5 * inv : -0.5 * b;
    const std::vector<double>& vpoly = model.extra_potential();
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i];
        if (!model.interval().contains(x))
            throw std::invalid_argument("cd_margin: grid node " + fmt(x) + " outside the model interval");
        const Jet p = model.phi(x);
        const Jet v = polynomial_jet(vpoly, x);
        const double r = p.d1 / p.value;
        double val = (b * p.d2 - rho) / p.value + quad_coeff * r * r + v.d2 + 0.5 * v.d1 * r;
        if (finite) val -= (2.0 * b * v.d1 * r + v.d1 * v.d1) * inv;
        rep.margin[i] = val;
        if (val < rep.min_margin) {
            rep.min_margin = val;
            rep.arg_min = x;
        }
    }
    return rep;
}

std::vector<double> generator_apply(const DiffusionModel& model, std::span<const double> grid,
                                    std::span<const double> f1, std::span<const double> f2) {
    if (grid.size() != f1.size() || grid.size() != f2.size())
        throw std::invalid_argument("generator_apply: size mismatch");
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        out[i] = model.phi(grid[i]).value * f2[i] + model.drift(grid[i]) * f1[i];
    return out;
}

std::vector<double> generator_apply(const DiffusionModel& model, std::span<const double> grid,
                                    std::span<const double> f) {
    const NodalDerivatives d = differentiate(grid, f);
    return generator_apply(model, grid, d.d1, d.d2);
}

std::vector<double> carre_du_champ_from_derivative(const DiffusionModel& model,
                                                   std::span<const double> grid,
                                                   std::span<const double> f1) {
    if (grid.size() != f1.size()) throw std::invalid_argument("carre_du_champ: size mismatch");
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = model.phi(grid[i]).value * f1[i] * f1[i];
    return out;
}

std::vector<double> carre_du_champ(const DiffusionModel& model, std::span<const double> grid,
                                   std::span<const double> f) {
    const NodalDerivatives d = differentiate(grid, f);
    return carre_du_champ_from_derivative(model, grid, d.d1);
}

IdentityMoments identity_moments(const DiffusionModel& model) {
    if (!model.interval().bounded() && model.default_mapping().kind == Mapping::Kind::tan_compactify &&
        !(model.beta() > 1.5)) {
        throw std::domain_error("identity_moments: second moment of " + model.id() +
                                " diverges (need N < -1)");
    }
    const QuadratureRule rule = model.quadrature(96);
    double m1 = 0.0, m2 = 0.0, g = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double x = rule.nodes[i];
        m1 += rule.weights[i] * x;
        m2 += rule.weights[i] * x * x;
        g += rule.weights[i] * model.phi(x).value;
    }
    if (!std::isfinite(m2) || !std::isfinite(g))
        throw std::domain_error("identity_moments: divergent moment for " + model.id());
    return {m2 - m1 * m1, g};
}

}  // namespace gapstab
