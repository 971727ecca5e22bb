#include "gapstab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gapstab {

namespace {

constexpr int kCellPoints = 8;

struct CellRule {
    std::vector<double> x;
    std::vector<double> w;
};

void push_point(CellRule& out, const DiffusionModel& m, double x, double jac_weight, double log_jac) {
    out.x.push_back(x);
    out.w.push_back(jac_weight * std::exp(m.log_density(x) - m.log_norm() + log_jac));
}

// Quadrature of the normalized density over one cell [ua, ub] in u.
CellRule cell_rule(const DiffusionModel& m, const Mapping& map, double ua, double ub, bool first,
                   bool last, const QuadratureRule& gl) {
    CellRule out;
    switch (map.kind) {
        case Mapping::Kind::direct: {
            const QuadratureRule r = (first || last)
                                         ? graded_composite_rule(ua, ub, 1, kCellPoints, first, last)
                                         : gauss_legendre(kCellPoints, ua, ub);
            for (std::size_t q = 0; q < r.size(); ++q) push_point(out, m, r.nodes[q], r.weights[q], 0.0);
            break;
        }
        case Mapping::Kind::truncate: {
            const QuadratureRule r = gauss_legendre(kCellPoints, ua, ub);
            for (std::size_t q = 0; q < r.size(); ++q) push_point(out, m, r.nodes[q], r.weights[q], 0.0);
            break;
        }
        case Mapping::Kind::tan_compactify: {
            if (first || last) {
                // Distance s to the end at ±π/2, x = ∓cot s.
                const double width = ub - ua;
                const QuadratureRule r = graded_composite_rule(0.0, width, 1, kCellPoints, true, false);
                if (first) {
                    for (std::size_t q = 0; q < r.size(); ++q) {
                        const double x = -1.0 / std::tan(r.nodes[q]);
                        push_point(out, m, x, r.weights[q], std::log1p(x * x));
                    }
                } else {
                    for (std::size_t q = r.size(); q-- > 0;) {
                        const double x = 1.0 / std::tan(r.nodes[q]);
                        push_point(out, m, x, r.weights[q], std::log1p(x * x));
                    }
                }
            } else {
                const double mid = 0.5 * (ua + ub), half = 0.5 * (ub - ua);
                for (std::size_t q = 0; q < gl.size(); ++q) {
                    const double x = std::tan(mid + half * gl.nodes[q]);
                    push_point(out, m, x, half * gl.weights[q], std::log1p(x * x));
                }
            }
            break;
        }
    }
    return out;
}

// Lagrange basis values and derivatives at t for nodes s (size 2 or 3).
void lagrange(std::span<const double> s, double t, double* value, double* slope) {
    const std::size_t k = s.size();
    for (std::size_t j = 0; j < k; ++j) {
        double num = 1.0, den = 1.0, dnum = 0.0;
        for (std::size_t m = 0; m < k; ++m) {
            if (m == j) continue;
            den *= s[j] - s[m];
        }
        for (std::size_t m = 0; m < k; ++m) {
            if (m == j) continue;
            double prod = 1.0;
            for (std::size_t l = 0; l < k; ++l)
                if (l != j && l != m) prod *= t - s[l];
            dnum += prod;
            num *= t - s[m];
        }
        value[j] = num / den;
        slope[j] = dnum / den;
    }
}

bool unbounded_cell(const DiscreteOperator& op, std::size_t i) {
    return !std::isfinite(op.edges[i]) || !std::isfinite(op.edges[i + 1]);
}

}  // namespace

std::vector<double> DiscreteOperator::apply(std::span<const double> f) const {
    const std::size_t n = size();
    if (f.size() != n) throw std::invalid_argument("DiscreteOperator::apply: size mismatch");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double flux = 0.0;
        if (i > 0) flux += conductance[i] * (f[i] - f[i - 1]);
        if (i + 1 < n) flux += conductance[i + 1] * (f[i] - f[i + 1]);
        out[i] = flux / mass[i];
    }
    return out;
}

double DiscreteOperator::dirichlet_form(std::span<const double> f) const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < size(); ++i) {
        const double d = f[i + 1] - f[i];
        s += conductance[i + 1] * d * d;
    }
    return s;
}

double DiscreteOperator::inner(std::span<const double> f, std::span<const double> g) const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += mass[i] * f[i] * g[i];
    return s;
}

DiscreteOperator discretize(const DiffusionModel& model, int n) {
    return discretize(model, n, model.default_mapping());
}

DiscreteOperator discretize(const DiffusionModel& model, int n, const Mapping& mapping) {
    if (n < 16) throw std::invalid_argument("discretize: need at least 16 cells");
    const Interval& iv = model.interval();
    double ua = 0.0, ub = 0.0;
    switch (mapping.kind) {
        case Mapping::Kind::direct:
            if (!iv.bounded())
                throw std::invalid_argument("discretize: direct mapping needs a bounded interval (model " +
                                            model.id() + ")");
            ua = iv.lower;
            ub = iv.upper;
            break;
        case Mapping::Kind::tan_compactify:
            if (!iv.is_real_line())
                throw std::invalid_argument("discretize: tan_compactify is only defined on the real line");
            if (model.in_beta_family() && !(model.beta() > 0.5))
                throw std::invalid_argument("discretize: density of " + model.id() +
                                            " is not integrable on the real line");
            ua = -0.5 * std::numbers::pi;
            ub = 0.5 * std::numbers::pi;
            break;
        case Mapping::Kind::truncate:
            if (!iv.is_real_line())
                throw std::invalid_argument("discretize: truncate is only defined on the real line");
            if (!(mapping.radius > 0.0)) throw std::invalid_argument("discretize: truncation radius must be > 0");
            ua = -mapping.radius;
            ub = mapping.radius;
            break;
    }

    DiscreteOperator op;
    op.model = std::make_shared<const DiffusionModel>(model);
    op.mapping = mapping;
    const std::size_t cells = static_cast<std::size_t>(n);
    const double h = (ub - ua) / n;
    const QuadratureRule gl = gauss_legendre(kCellPoints);

    op.nodes.resize(cells);
    op.mass.resize(cells);
    op.cell_offset.assign(1, 0);
    for (std::size_t i = 0; i < cells; ++i) {
        const double a = ua + h * static_cast<double>(i);
        const double b = i + 1 == cells ? ub : ua + h * static_cast<double>(i + 1);
        const CellRule r = cell_rule(model, mapping, a, b, i == 0, i + 1 == cells, gl);
        double w = 0.0, wx = 0.0;
        for (std::size_t q = 0; q < r.x.size(); ++q) {
            w += r.w[q];
            wx += r.w[q] * r.x[q];
        }
        if (!(w > 0.0) || !std::isfinite(wx))
            throw std::invalid_argument("discretize: density of " + model.id() +
                                        " is not integrable on the chosen domain");
        op.mass[i] = w;
        op.nodes[i] = wx / w;
        op.cell_nodes.insert(op.cell_nodes.end(), r.x.begin(), r.x.end());
        op.cell_weights.insert(op.cell_weights.end(), r.w.begin(), r.w.end());
        op.cell_offset.push_back(op.cell_nodes.size());
    }

    op.edges.resize(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) {
        const double u = i == cells ? ub : ua + h * static_cast<double>(i);
        switch (mapping.kind) {
            case Mapping::Kind::direct:
            case Mapping::Kind::truncate: op.edges[i] = u; break;
            case Mapping::Kind::tan_compactify:
                if (i == 0)
                    op.edges[i] = -std::numeric_limits<double>::infinity();
                else if (i == cells)
                    op.edges[i] = std::numeric_limits<double>::infinity();
                else
                    op.edges[i] = std::tan(u);
                break;
        }
    }

    double total = 0.0;
    for (double w : op.mass) total += w;
    for (double& w : op.mass) w /= total;
    for (double& w : op.cell_weights) w /= total;

    op.conductance.assign(cells + 1, 0.0);
    for (std::size_t i = 1; i < cells; ++i) {
        const double xe = op.edges[i];
        const double flux = model.phi(xe).value * std::exp(model.log_density(xe) - model.log_norm()) / total;
        op.conductance[i] = flux / (op.nodes[i] - op.nodes[i - 1]);
    }

    op.matrix.diag.resize(cells);
    op.matrix.off.resize(cells - 1);
    for (std::size_t i = 0; i < cells; ++i)
        op.matrix.diag[i] = (op.conductance[i] + op.conductance[i + 1]) / op.mass[i];
    for (std::size_t i = 0; i + 1 < cells; ++i)
        op.matrix.off[i] = -op.conductance[i + 1] / std::sqrt(op.mass[i] * op.mass[i + 1]);
    return op;
}

CellField reconstruct(const DiscreteOperator& op, std::span<const double> f) {
    const std::size_t n = op.size();
    if (f.size() != n) throw std::invalid_argument("reconstruct: size mismatch");
    CellField out;
    out.value.resize(op.cell_nodes.size());
    out.slope.resize(op.cell_nodes.size());
    double bv[3], bs[3];
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j0 = 0, k = 3;
        if (unbounded_cell(op, i)) {
            // Far tails: affine continuation from the two outermost nodes.
            k = 2;
            j0 = i == 0 ? 0 : n - 2;
        } else {
            j0 = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(i) - 1, 0,
                                            static_cast<std::ptrdiff_t>(n) - 3);
        }
        const std::span<const double> s(op.nodes.data() + j0, k);
        for (std::size_t q = op.cell_offset[i]; q < op.cell_offset[i + 1]; ++q) {
            lagrange(s, op.cell_nodes[q], bv, bs);
            double v = 0.0, d = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                v += bv[j] * f[j0 + j];
                d += bs[j] * f[j0 + j];
            }
            out.value[q] = v;
            out.slope[q] = d;
        }
    }
    return out;
}

double cell_integral(const DiscreteOperator& op, std::span<const double> g) {
    if (g.size() != op.cell_weights.size()) throw std::invalid_argument("cell_integral: size mismatch");
    double s = 0.0;
    for (std::size_t q = 0; q < g.size(); ++q) s += op.cell_weights[q] * g[q];
    return s;
}

std::vector<double> edge_values(const DiscreteOperator& op, std::span<const double> f) {
    const std::size_t n = op.size();
    std::vector<double> out(n + 1);
    double bv[3], bs[3];
    for (std::size_t e = 0; e <= n; ++e) {
        const double xe = op.edges[e];
        if (!std::isfinite(xe)) {
            out[e] = xe < 0 ? f.front() : f.back();
            continue;
        }
        // Three nearest nodes around the edge.
        const std::size_t j0 = static_cast<std::size_t>(
            std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(e) - 1, 0, static_cast<std::ptrdiff_t>(n) - 3));
        const std::span<const double> s(op.nodes.data() + j0, 3);
        lagrange(s, xe, bv, bs);
        double v = 0.0;
        for (std::size_t j = 0; j < 3; ++j) v += bv[j] * f[j0 + j];
        out[e] = v;
    }
    return out;
}

double SpectralDecomposition::cutoff_value() const {
    if (values.size() < spectrum.size()) return spectrum[values.size()];
    return std::numeric_limits<double>::infinity();
}

SpectralDecomposition eigen_lowest(const DiscreteOperator& op, int k) {
    const std::size_t n = op.size();
    if (k < 1 || static_cast<std::size_t>(k) > n) throw std::invalid_argument("eigen_lowest: need 1 <= k <= n");
    SpectralDecomposition dec;
    dec.op = std::make_shared<const DiscreteOperator>(op);
    dec.spectrum = tridiagonal_eigenvalues(op.matrix);

    std::vector<std::vector<double>> sym;
    sym.reserve(k);
    const double scale = op.matrix.norm_inf();
    for (int j = 0; j < k; ++j) {
        std::vector<double> y = inverse_iteration(op.matrix, dec.spectrum[j], sym);
        sym.push_back(y);
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = y[i] / std::sqrt(op.mass[i]);
        const double nrm = std::sqrt(op.inner(v, v));
        for (double& x : v) x /= nrm;

        double moment = 0.0;
        for (std::size_t i = 0; i < n; ++i) moment += op.mass[i] * op.nodes[i] * v[i];
        const bool flip = std::abs(moment) > 1e-10 ? moment < 0.0 : v.back() < 0.0;
        if (flip)
            for (double& x : v) x = -x;

        const double lambda = op.dirichlet_form(v);
        const std::vector<double> lv = op.apply(v);
        double res = 0.0;
        for (std::size_t i = 0; i < n; ++i) res += op.mass[i] * (lv[i] - lambda * v[i]) * (lv[i] - lambda * v[i]);
        res = std::sqrt(res);
        if (res > 1e-6 * std::max(1.0, lambda) + 1e-12 * scale)
            throw ConvergenceError("eigen_lowest: eigenpair " + std::to_string(j) + " did not converge", res);
        dec.values.push_back(lambda);
        dec.vectors.push_back(std::move(v));
        dec.residuals.push_back(res);
    }
    return dec;
}

std::vector<double> extrapolated_eigenvalues(const DiffusionModel& model, int n, const Mapping& mapping,
                                             int k) {
    const SpectralDecomposition fine = eigen_lowest(discretize(model, n, mapping), k);
    const SpectralDecomposition coarse = eigen_lowest(discretize(model, n / 2, mapping), k);
    std::vector<double> out(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) out[j] = (4.0 * fine.values[j] - coarse.values[j]) / 3.0;
    return out;
}

double gamma_normalization(Dimension dim) {
    if (dim.is_infinite()) return 1.0;
    return dim.value() / (dim.value() + 1.0);
}

GapResult spectral_gap(const SpectralDecomposition& dec) {
    if (dec.size() < 2) throw std::invalid_argument("spectral_gap: decomposition needs at least 2 modes");
    const DiscreteOperator& op = *dec.op;
    GapResult out;
    out.lambda1 = dec.values[1];
    out.lambda2 = dec.size() > 2 ? dec.values[2] : dec.spectrum[2];
    out.near_degenerate = std::abs(out.lambda2 - out.lambda1) < 1e-8;
    out.f = dec.vectors[1];

    const CellField cf = reconstruct(op, out.f);
    std::vector<double> gam(cf.slope.size());
    for (std::size_t q = 0; q < gam.size(); ++q)
        gam[q] = op.model->phi(op.cell_nodes[q]).value * cf.slope[q] * cf.slope[q];
    const double gamma = cell_integral(op, gam);
    const double target = gamma_normalization(op.model->dimension());
    const double s = std::sqrt(target / gamma);
    for (double& x : out.f) x *= s;
    out.gamma_mass = target;
    return out;
}

GapResult spectral_gap(const DiscreteOperator& op) { return spectral_gap(eigen_lowest(op, 3)); }

SemigroupResult semigroup_apply(const SpectralDecomposition& dec, double t, std::span<const double> f) {
    if (t < 0.0) throw std::invalid_argument("semigroup_apply: t must be >= 0");
    const DiscreteOperator& op = *dec.op;
    const std::size_t n = op.size();
    if (f.size() != n) throw std::invalid_argument("semigroup_apply: size mismatch");
    SemigroupResult out;
    out.values.assign(n, 0.0);
    std::vector<double> rem(f.begin(), f.end());
    for (std::size_t j = 0; j < dec.size(); ++j) {
        const auto& v = dec.vectors[j];
        const double a = op.inner(f, v);
        const double damp = std::exp(-dec.values[j] * t);
        for (std::size_t i = 0; i < n; ++i) {
            out.values[i] += damp * a * v[i];
            rem[i] -= a * v[i];
        }
    }
    out.remainder_norm = std::sqrt(op.inner(rem, rem));
    out.error_bound = std::exp(-dec.cutoff_value() * t) * out.remainder_norm;
    if (std::isnan(out.error_bound)) out.error_bound = 0.0;
    return out;
}

std::vector<UltracontractivityRow> ultracontractivity_probe(const SpectralDecomposition& dec,
                                                            std::span<const double> times) {
    const DiffusionModel& m = *dec.op->model;
    const Dimension dim = m.dimension();
    if (dim.is_infinite() || !(dim.value() > 1.0) || !m.interval().bounded())
        throw std::invalid_argument("ultracontractivity_probe: needs a Jacobi-type model with N > 1");
    const double nn = dim.value();
    const double c = std::pow(2.0 + 2.0 * nn / ((nn - 1.0) * (nn - 1.0)), 0.5 * (nn + 1.0));
    std::vector<UltracontractivityRow> rows;
    const std::size_t n = dec.op->size();
    for (double t : times) {
        if (!(t > 0.0)) throw std::invalid_argument("ultracontractivity_probe: times must be > 0");
        UltracontractivityRow row;
        row.t = t;
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double k = 0.0;
            for (std::size_t j = 0; j < dec.size(); ++j) k += std::exp(-dec.values[j] * t) * dec.vectors[j][i] * dec.vectors[j][i];
            best = std::max(best, k);
        }
        row.sup_kernel_bound = best;
        row.theory_bound = c * std::pow(t, -0.5 * (nn + 1.0));
        const double cutoff = dec.cutoff_value();
        row.tail = std::isfinite(cutoff) ? std::exp(-cutoff * t) * static_cast<double>(dec.size()) : 0.0;
        row.flagged = row.tail > 0.01 * best;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace gapstab
