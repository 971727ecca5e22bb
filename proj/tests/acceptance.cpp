// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gapstab/cli.hpp"
#include "gapstab/estimates.hpp"
#include "gapstab/experiments.hpp"
#include "gapstab/measures.hpp"
#include "gapstab/models.hpp"
#include "gapstab/spectral.hpp"
#include "gapstab/stein.hpp"

using namespace gapstab;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += " [failed: " + what + "]";
        }
    }
    void note(const char* format, double v) {
        char buf[160];
        std::snprintf(buf, sizeof buf, format, v);
        detail += ' ';
        detail += buf;
    }
};

std::string g6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

const std::vector<double> kDeltas = default_deltas();

// Rate tables are shared between criteria.
const RateTable& table(FamilyKind kind, double N) {
    static std::vector<std::pair<std::pair<FamilyKind, double>, RateTable>> cache;
    for (const auto& [key, t] : cache)
        if (key.first == kind && key.second == N) return t;
    FamilySpec spec;
    spec.kind = kind;
    spec.N = N;
    cache.push_back({{kind, N}, run_family(spec, kDeltas, 2000)});
    return cache.back().second;
}

Verdict model_exactness() {
    Verdict v;
    double worst_j = 0.0, worst_c = 0.0;
    for (double N : {2.0, 3.0, 5.0, 7.5}) {
        const double l = spectral_gap(discretize(jacobi_model(N), 2000)).lambda1;
        worst_j = std::max(worst_j, std::abs(l - N) / N);
    }
    for (double N : {-2.0, -3.0, -5.0}) {
        const double l = spectral_gap(discretize(cauchy_model(N), 2000)).lambda1;
        worst_c = std::max(worst_c, std::abs(l - std::abs(N)));
    }
    const double ou = std::abs(spectral_gap(discretize(gaussian_model(), 2000)).lambda1 - 1.0);
    v.require(worst_j <= 1e-6, "jacobi rel err " + g6(worst_j));
    v.require(worst_c <= 1e-5, "cauchy err " + g6(worst_c));
    v.require(ou <= 1e-6, "OU err " + g6(ou));
    v.note("jacobi_rel_err=%.2e", worst_j);
    v.note("cauchy_err=%.2e", worst_c);
    v.note("ou_err=%.2e", ou);
    return v;
}

Verdict moments() {
    Verdict v;
    double worst = 0.0;
    for (double N : {2.0, 3.0, 5.0, 7.5}) {
        const IdentityMoments m = identity_moments(jacobi_model(N));
        worst = std::max({worst, std::abs(m.variance - 1 / (N + 1)), std::abs(m.gamma_mass - N / (N + 1))});
    }
    for (double N : {-2.0, -3.0, -5.0}) {
        const IdentityMoments m = identity_moments(cauchy_model(N));
        worst = std::max(worst, std::abs(m.variance + 1 / (N + 1)));
    }
    v.require(worst <= 1e-8, "moment err " + g6(worst));
    v.note("max_err=%.2e", worst);
    return v;
}

Verdict cd_equality() {
    Verdict v;
    double worst = 0.0;
    auto sweep = [&](const DiffusionModel& m, double rho, double N) {
        const MarginReport r = cd_margin(m, rho, Dimension(N), margin_grid(m));
        for (double x : r.margin) worst = std::max(worst, std::abs(x));
    };
    for (double N : {2.0, 3.0, 5.0, 7.5}) sweep(jacobi_model(N), N - 1, N);
    for (double N : {-1.5, -2.0, -3.0, -5.0}) sweep(cauchy_model(N), 1 - N, N);
    v.require(worst <= 1e-10, "max |margin| " + g6(worst));
    v.note("max_abs_margin=%.2e", worst);
    return v;
}

Verdict sharp_rate() {
    Verdict v;
    const double C_end = *constants_for(3.0).C_end;
    v.note("C_end(3)=%.6g", C_end);
    for (FamilyKind k : {FamilyKind::beta_scaled, FamilyKind::beta_dim_shift}) {
        const RateTable& t = table(k, 3.0);
        v.require(t.rows.size() == kDeltas.size() && t.rejected.empty(), t.family + " rows missing");
        const RateFit f = fit_rate(t, RateLaw::linear_eps);
        v.require(std::abs(f.exponent - 1.0) <= 0.10, t.family + " slope " + g6(f.exponent));
        double worst = 0.0;
        for (const RateRow& r : t.rows) {
            worst = std::max(worst, r.w1 / (C_end * r.eps));
            v.require(r.w1 <= C_end * r.eps, t.family + " row delta=" + g6(r.delta));
        }
        v.detail += ' ' + t.family + ":slope=" + g6(f.exponent) + ",max_w1/(C_end*eps)=" + g6(worst);
    }
    return v;
}

Verdict deficit_inequalities() {
    Verdict v;
    const double C32 = *constants_for(3.0).lemma32_C;
    double lh = 0.0, def = 0.0, cau = 0.0;
    for (FamilyKind k : {FamilyKind::beta_scaled, FamilyKind::beta_dim_shift}) {
        for (const RateRow& r : table(k, 3.0).rows) {
            const double bochner = 4.0 * 3.0 * r.eps * r.f2_l1;
            lh = std::max(lh, r.lh_l1 / bochner);
            def = std::max(def, r.deficit_l1 / (C32 * r.eps));
        }
    }
    for (const RateRow& r : table(FamilyKind::cauchy_dim_shift, -3.0).rows) cau = std::max(cau, r.lh_l1 / r.lh_bound);
    v.require(lh <= 1.01, "Bochner bound ratio " + g6(lh));
    v.require(def <= 1.01, "deficit bound ratio " + g6(def));
    v.require(cau <= 1.01, "cauchy Bochner bound ratio " + g6(cau));
    v.note("max ||Lh||/(4N eps ||f^2||)=%.4g", lh);
    v.note("max ||h-1||/(C eps)=%.4g", def);
    v.note("cauchy ||Lh||/bound=%.4g", cau);
    return v;
}

Verdict prop34_audit() {
    Verdict v;
    const DiscreteOperator op = discretize(jacobi_model(3.0), 2000);
    const SpectralDecomposition dec = eigen_lowest(op, 9);
    std::mt19937_64 rng(20240601);
    int violations = 0;
    double worst = 0.0, constant = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> g(op.size(), 0.0);
        for (int k = 1; k <= 8; ++k) {
            // random sparsity so single modes and mixtures are both sampled
            const double a = uniform01(rng) < 0.3 ? 0.0 : uniform(rng, -1.0, 1.0);
            for (std::size_t i = 0; i < op.size(); ++i) g[i] += a * dec.vectors[k][i];
        }
        if (std::all_of(g.begin(), g.end(), [](double x) { return x == 0.0; })) g = dec.vectors[1];
        const L1Audit a = l1_spectral_inequality_audit(op, g, L1Regime::prop34, 3.0);
        constant = a.constant;
        worst = std::max(worst, a.ratio);
        if (a.lhs > a.rhs) ++violations;
    }
    v.require(violations == 0, std::to_string(violations) + " violations");
    // the rounded constant 4.1325 dominates the exact one
    v.require(constant <= 4.1325 && constant > 4.132, "constant " + g6(constant));
    v.note("C=%.6g", constant);
    v.note("max ||g||/(C||Lg||)=%.4g", worst);
    return v;
}

Verdict ultracontractivity() {
    Verdict v;
    const std::vector<double> times{0.25, 0.5, 1.0};
    double worst = 0.0;
    for (double N : {2.0, 3.0}) {
        const SpectralDecomposition dec = eigen_lowest(discretize(jacobi_model(N), 2000), 60);
        for (const auto& row : ultracontractivity_probe(dec, times)) {
            worst = std::max(worst, row.sup_kernel_bound / row.theory_bound);
            v.require(row.sup_kernel_bound <= row.theory_bound, "N=" + g6(N) + " t=" + g6(row.t));
            v.require(!row.flagged, "spectral tail N=" + g6(N) + " t=" + g6(row.t));
        }
    }
    v.note("max sup_kernel/bound=%.4g", worst);
    return v;
}

Verdict gaussian_case() {
    Verdict v;
    for (FamilyKind k : {FamilyKind::gauss_stiff, FamilyKind::gauss_quartic}) {
        const RateTable& t = table(k, 3.0);
        v.require(t.rows.size() == kDeltas.size(), t.family + " rows missing");
        std::vector<double> eps, w1;
        for (const RateRow& r : t.rows) {
            eps.push_back(r.eps);
            w1.push_back(r.w1);
        }
        const ConstantFit c = fit_eps_log_constant(eps, w1);
        v.require(c.spread <= 1.5, t.family + " C_fit spread " + g6(c.spread));
        v.detail += ' ' + t.family + ":C_fit=" + g6(c.C_fit) + ",spread=" + g6(c.spread);
    }
    double worst = 0.0;
    for (const RateRow& r : table(FamilyKind::gauss_stiff, 3.0).rows) worst = std::max(worst, std::abs(r.w1 / *r.w1_exact - 1));
    v.require(worst <= 0.005, "closed-form mismatch " + g6(worst));
    v.note("gauss_stiff max rel w1 err=%.2e", worst);
    return v;
}

Verdict counterexample() {
    Verdict v;
    std::vector<CounterexampleRecord> recs;
    double err = 0.0;
    for (double r : {1.0, 2.0, 4.0, 8.0, 16.0}) {
        recs.push_back(ou_counterexample(r));
        err = std::max(err, std::abs(recs.back().l1_Lf - recs.back().l1_Lf_exact));
    }
    v.require(err <= 1e-12, "||Lf|| err " + g6(err));
    for (std::size_t i = 1; i < recs.size(); ++i) v.require(recs[i].ratio > recs[i - 1].ratio, "ratio not increasing");
    const double growth = recs[4].ratio / recs[1].ratio;
    v.require(growth >= 1.5, "ratio(16)/ratio(2) " + g6(growth));
    double c = INFINITY;
    for (std::size_t i = 1; i < recs.size(); ++i) c = std::min(c, recs[i].ratio / std::log(recs[i].r));
    v.require(c > 0.0, "log constant " + g6(c));
    v.note("max err=%.2e", err);
    v.note("ratio(16)/ratio(2)=%.4g", growth);
    v.note("min ratio/log r=%.4g", c);
    return v;
}

Verdict stein_audits() {
    Verdict v;
    double tail = INFINITY, gr = 0.0, dgr = 0.0, exact = 0.0;
    std::size_t violations = 0;
    for (double N : {-1.5, -2.0, -3.0, -5.0}) {
        for (const TailMargin& m : tail_bound_audit(N, tail_audit_grid(10000))) tail = std::min(tail, m.min_margin);
        const SteinAudit a = stein_bound_audit(N, 100, 1000 + static_cast<std::uint64_t>(-N * 10));
        violations += a.violations;
        gr = std::max(gr, a.max_g_ratio);
        dgr = std::max(dgr, a.max_gprime_ratio);
        const SteinSolution s = cauchy_stein_solve([](double x) { return x; }, {}, N, cauchy_stein_grid(2001));
        double dev = 0.0;
        for (double g : s.g) dev = std::max(dev, std::abs(g - 1.0 / N));
        exact = std::max({exact, dev, s.residual});
    }
    v.require(tail >= -1e-12, "tail margin " + g6(tail));
    v.require(violations == 0, std::to_string(violations) + " Stein bound violations");
    v.require(exact <= 1e-10, "h=x residual " + g6(exact));
    v.note("min tail margin=%.3g", tail);
    v.note("max sup|g|/L=%.4g", gr);
    v.note("max sup|g'|/K=%.4g", dgr);
    v.note("h=x max(dev,residual)=%.2e", exact);
    return v;
}

Verdict cauchy_stability() {
    Verdict v;
    const RateTable& t = table(FamilyKind::cauchy_dim_shift, -3.0);
    v.require(t.rows.size() == kDeltas.size() && t.rejected.empty(), "rows missing");
    std::vector<double> eps, stein;
    for (const RateRow& r : t.rows) {
        eps.push_back(r.eps);
        stein.push_back(r.stein_l1);
        v.require(r.pass, "row delta=" + g6(r.delta) + " w1=" + g6(r.w1) + " rhs=" + g6(r.thm_rhs));
    }
    const ConstantFit c = fit_eps_log_constant(eps, stein);
    for (std::size_t i = 0; i < eps.size(); ++i)
        v.require(stein[i] <= c.C_fit * eps[i] * std::log(2.0 / eps[i]) * (1 + 1e-12), "Stein quantity row");
    v.require(std::isfinite(c.C_fit) && c.C_fit > 0.0, "C_fit");
    double worst = 0.0;
    for (const RateRow& r : t.rows) worst = std::max(worst, r.w1 / r.thm_rhs);
    v.note("C_fit=%.4g", c.C_fit);
    v.note("spread=%.4g", c.spread);
    v.note("max w1/rhs=%.4g", worst);
    return v;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Verdict property_suites() {
    Verdict v;
    // operator symmetry
    double sym = 0.0;
    std::mt19937_64 rng(77);
    for (const DiffusionModel& m : {jacobi_model(3.0), cauchy_model(-3.0), gaussian_model(1.0, 0.1),
                                    scaled_model(jacobi_model(5.0), 0.8)}) {
        const DiscreteOperator op = discretize(m, 1000);
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<double> f(op.size()), g(op.size());
            for (auto& x : f) x = uniform(rng, -1, 1);
            for (auto& x : g) x = uniform(rng, -1, 1);
            const double a = op.inner(op.apply(f), g), b = op.inner(f, op.apply(g));
            sym = std::max(sym, std::abs(a - b) / std::max(std::abs(a), 1e-300));
        }
    }
    v.require(sym <= 1e-10, "symmetry " + g6(sym));

    // W1 axioms
    double ax = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        auto draw = [&] {
            std::vector<double> x, w;
            const int n = 1 + static_cast<int>(uniform01(rng) * 12);
            for (int i = 0; i < n; ++i) {
                x.push_back(uniform(rng, -3, 3));
                w.push_back(uniform(rng, 0.05, 1));
            }
            return QuadratureMeasure::from_atoms(x, w);
        };
        const QuadratureMeasure a = draw(), b = draw(), c = draw();
        ax = std::max(ax, w1_distance(a, a));
        ax = std::max(ax, std::abs(w1_distance(a, b) - w1_distance(b, a)));
        ax = std::max(ax, w1_distance(a, c) - w1_distance(a, b) - w1_distance(b, c));
        if (!(w1_distance(a, b) >= 0.0)) ax = INFINITY;
    }
    v.require(ax <= 1e-12, "W1 axioms " + g6(ax));

    // Stein characterization: polynomials of degree ≤ 6 for the beta and
    // Gaussian targets, bounded Lipschitz g for the Cauchy targets
    double on = 0.0, off = INFINITY;
    for (const TargetDistribution& t : {TargetDistribution::beta(3.0), TargetDistribution::beta(6.0),
                                        TargetDistribution::gauss()}) {
        const QuadratureMeasure mu = target_measure(t);
        for (int d = 0; d <= 6; ++d) {
            auto g = [d](double x) { return std::pow(x, d) + 0.5 * x; };
            auto dg = [d](double x) { return (d > 0 ? d * std::pow(x, d - 1) : 0.0) + 0.5; };
            on = std::max(on, std::abs(stein_operator_apply(t, g, dg, mu)));
        }
    }
    const std::vector<std::pair<ScalarFunction, ScalarFunction>> bounded = {
        {[](double x) { return std::atan(x); }, [](double x) { return 1 / (1 + x * x); }},
        {[](double x) { return x / std::sqrt(1 + x * x); }, [](double x) { return std::pow(1 + x * x, -1.5); }},
        {[](double x) { return 1 / (1 + x * x); }, [](double x) { return -2 * x / ((1 + x * x) * (1 + x * x)); }},
        {[](double x) { return std::tanh(x); }, [](double x) { return 1 / (std::cosh(x) * std::cosh(x)); }}};
    for (double N : {-1.5, -2.5, -4.0}) {
        const TargetDistribution t = TargetDistribution::cauchy(N);
        const QuadratureMeasure mu = target_measure(t);
        for (const auto& [g, dg] : bounded) on = std::max(on, std::abs(stein_operator_apply(t, g, dg, mu)));
    }
    const TargetDistribution b3 = TargetDistribution::beta(3.0);
    const double disc_on = beta_discrepancy(target_measure(b3, 200), 3.0, 200).value;
    for (double N : {2.0, 5.0}) {
        off = std::min(off, beta_discrepancy(target_measure(TargetDistribution::beta(N), 200), 3.0, 200).value);
    }
    v.require(on <= 1e-8, "Stein identity " + g6(on));
    v.require(disc_on <= 1e-9, "discrepancy on target " + g6(disc_on));
    v.require(off > 1e-3, "discrepancy off target " + g6(off));

    // determinism of CSV outputs
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "gapstab_acceptance";
    fs::remove_all(root);
    std::ostringstream sink;
    bool same = true;
    const std::vector<std::vector<std::string>> runs = {
        {"stein-audit", "--N", "-3", "--samples", "20", "--seed", "5"},
        {"stability", "--family", "gauss_quartic", "--deltas", "0.01,0.1", "--n", "500"},
        {"tail-audit", "--N", "-2", "--grid", "2000"}};
    for (std::size_t k = 0; k < runs.size(); ++k) {
        std::vector<std::string> a = runs[k], b = runs[k];
        a.insert(a.end(), {"--out", (root / ("a" + std::to_string(k))).string()});
        b.insert(b.end(), {"--out", (root / ("b" + std::to_string(k))).string()});
        run_cli(a, sink, sink);
        run_cli(b, sink, sink);
        for (const auto& e : fs::directory_iterator(root / ("a" + std::to_string(k)))) {
            if (e.path().extension() != ".csv") continue;
            const fs::path other = root / ("b" + std::to_string(k)) / e.path().filename();
            same = same && slurp(e.path()) == slurp(other) && !slurp(other).empty();
        }
    }
    fs::remove_all(root);
    v.require(same, "CSV outputs differ between identical runs");
    v.note("symmetry=%.2e", sym);
    v.note("w1_axioms=%.2e", ax);
    v.note("stein_identity=%.2e", on);
    v.note("off_target_disc=%.3g", off);
    v.detail += same ? " csv=identical" : " csv=differs";
    return v;
}

}  // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IOLBF, 0);
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"model exactness", model_exactness},
        {"moments", moments},
        {"CD equality cases", cd_equality},
        {"sharp rate, beta families", sharp_rate},
        {"deficit inequalities", deficit_inequalities},
        {"L1 spectral inequality audit", prop34_audit},
        {"ultracontractivity", ultracontractivity},
        {"Gaussian case", gaussian_case},
        {"OU counterexample", counterexample},
        {"Stein audits", stein_audits},
        {"Cauchy stability", cauchy_stability},
        {"property suites", property_suites},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string(" [exception: ") + e.what() + "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %zu (%s):%s (%.1fs)\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    v.detail.c_str(), secs);
        if (!v.pass) ++failures;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
