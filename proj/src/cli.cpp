#include "gapstab/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "gapstab/estimates.hpp"
#include "gapstab/experiments.hpp"
#include "gapstab/measures.hpp"
#include "gapstab/models.hpp"
#include "gapstab/spectral.hpp"
#include "gapstab/stein.hpp"

namespace gapstab {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad number for " + key + ": " + v);
    }
    if (used != v.size()) throw std::invalid_argument("config: bad number for " + key + ": " + v);
    return x;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    return out;
}

std::string join(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ',';
        s += fmt(xs[i]);
    }
    return s;
}

// Thrown for bad parameter combinations detected after parsing.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

DiffusionModel build_model(const RunConfig& cfg) {
    const ModelKind kind = parse_model_kind(cfg.model);
    switch (kind) {
        case ModelKind::jacobi: return jacobi_model(cfg.N);
        case ModelKind::cauchy: return cauchy_model(cfg.N);
        case ModelKind::gaussian: return gaussian_model(cfg.kappa, cfg.quartic);
        case ModelKind::scaled: return scaled_model(jacobi_model(cfg.N), cfg.radius);
        case ModelKind::phi_perturbed:
            return phi_perturbed_model(jacobi_model(cfg.N), cfg.delta, parse_bump_profile(cfg.bump));
    }
    throw UsageError("unknown model");
}

Mapping build_mapping(const RunConfig& cfg, const DiffusionModel& model) {
    return cfg.mapping.empty() ? model.default_mapping() : parse_mapping(cfg.mapping);
}

TargetDistribution target_for(const Dimension& dim) {
    if (dim.is_infinite()) return TargetDistribution::gauss();
    if (dim.value() > 1.0) return TargetDistribution::beta(dim.value());
    return TargetDistribution::cauchy(dim.value());
}

struct Outcome {
    int status = exit_pass;
    std::string summary;
    std::vector<std::pair<std::string, std::string>> artifacts;  // file name, content
};

void line(std::string& s, const std::string& key, double v) { s += key + " = " + fmt(v) + '\n'; }
void line(std::string& s, const std::string& key, const std::string& v) { s += key + " = " + v + '\n'; }

Outcome cmd_model_info(const RunConfig& cfg) {
    const DiffusionModel m = build_model(cfg);
    Outcome o;
    o.summary = m.describe();
    const IdentityMoments mo = identity_moments(m);
    line(o.summary, "variance", mo.variance);
    line(o.summary, "gamma_id", mo.gamma_mass);
    line(o.summary, "reference_gap", m.reference_gap());
    std::string csv = "key,value\n";
    csv += "variance," + fmt(mo.variance) + '\n';
    csv += "gamma_id," + fmt(mo.gamma_mass) + '\n';
    csv += "reference_gap," + fmt(m.reference_gap()) + '\n';
    o.artifacts.push_back({"model_info.csv", csv});
    return o;
}

Outcome cmd_cd_check(const RunConfig& cfg) {
    const DiffusionModel m = build_model(cfg);
    const MarginReport rep = cd_margin(m, m.curvature(), m.dimension(), margin_grid(m));
    Outcome o;
    line(o.summary, "model", m.id());
    line(o.summary, "rho", m.curvature());
    line(o.summary, "N", m.dimension().str());
    line(o.summary, "min_margin", rep.min_margin);
    line(o.summary, "arg_min", rep.arg_min);
    const bool ok = rep.min_margin >= -1e-9;
    line(o.summary, "result", ok ? "PASS" : "FAIL");
    o.status = ok ? exit_pass : exit_fail;
    std::string csv = "x,margin\n";
    for (std::size_t i = 0; i < rep.grid.size(); ++i) csv += fmt(rep.grid[i]) + ',' + fmt(rep.margin[i]) + '\n';
    o.artifacts.push_back({"cd_margin.csv", csv});
    return o;
}

Outcome cmd_gap(const RunConfig& cfg) {
    const DiffusionModel m = build_model(cfg);
    const DiscreteOperator op = discretize(m, cfg.n, build_mapping(cfg, m));
    const SpectralDecomposition dec = eigen_lowest(op, 4);
    const GapResult g = spectral_gap(dec);
    const double ref = m.reference_gap();
    Outcome o;
    line(o.summary, "model", m.id());
    line(o.summary, "n", fmt(cfg.n));
    line(o.summary, "mapping", to_string(op.mapping));
    o.summary += "lambda1 = " + fixed6(g.lambda1) + '\n';
    line(o.summary, "lambda1_full", g.lambda1);
    line(o.summary, "lambda2", g.lambda2);
    line(o.summary, "reference_gap", ref);
    const bool ok = g.lambda1 >= ref * (1.0 - 1e-6);
    line(o.summary, "result", ok ? "PASS" : "FAIL");
    o.status = ok ? exit_pass : exit_fail;
    std::string csv = "k,eigenvalue,residual\n";
    for (std::size_t k = 0; k < dec.size(); ++k)
        csv += std::to_string(k) + ',' + fmt(dec.values[k]) + ',' + fmt(dec.residuals[k]) + '\n';
    o.artifacts.push_back({"gap.csv", csv});
    return o;
}

Outcome cmd_deficit(const RunConfig& cfg) {
    const DiffusionModel m = build_model(cfg);
    const DiscreteOperator op = discretize(m, cfg.n, build_mapping(cfg, m));
    const SpectralDecomposition dec = eigen_lowest(op, 3);
    const DeficitReport d = eigen_deficit(dec);
    Outcome o;
    line(o.summary, "model", m.id());
    line(o.summary, "lambda1", d.lambda1);
    line(o.summary, "eps", d.eps);
    line(o.summary, "deficit_l1", d.deficit_l1);
    line(o.summary, "stein_l1", d.stein_l1);
    line(o.summary, "lh_l1", d.lh_l1);
    line(o.summary, "lh_bound", d.bound_rhs);
    line(o.summary, "f2_l1", d.f2_l1);
    line(o.summary, "identity_error", d.identity_error);
    const bool ok = !d.lichnerowicz_fault && d.lh_l1 <= 1.01 * d.bound_rhs + 1e-6;
    line(o.summary, "result", ok ? "PASS" : "FAIL");
    o.status = ok ? exit_pass : exit_fail;
    std::string csv = "x,f,h\n";
    for (std::size_t i = 0; i < op.size(); ++i) csv += fmt(op.nodes[i]) + ',' + fmt(d.f[i]) + ',' + fmt(d.h[i]) + '\n';
    o.artifacts.push_back({"deficit.csv", csv});
    return o;
}

Outcome cmd_stability(const RunConfig& cfg) {
    FamilySpec spec;
    spec.kind = parse_family_kind(cfg.family);
    spec.N = cfg.N;
    spec.bump = parse_bump_profile(cfg.bump);
    if (cfg.deltas.empty()) throw UsageError("stability: empty --deltas");
    const RateTable t = run_family(spec, cfg.deltas, cfg.n);
    Outcome o;
    line(o.summary, "family", t.family);
    line(o.summary, "N", spec.N);
    for (const auto& r : t.rows) {
        o.summary += "delta = " + fmt(r.delta) + "  eps = " + fmt(r.eps) + "  w1 = " + fmt(r.w1) +
                     "  thm_rhs = " + fmt(r.thm_rhs) + "  " + (r.pass ? "pass" : "FAIL") + '\n';
    }
    for (const auto& r : t.rejected) o.summary += "rejected delta = " + fmt(r.delta) + ": " + r.reason + '\n';
    if (t.rows.size() >= 4) {
        try {
            const RateFit f = fit_rate(t, RateLaw::linear_eps);
            line(o.summary, "slope", f.exponent);
            line(o.summary, "fit_constant", f.constant);
        } catch (const std::invalid_argument& e) {
            line(o.summary, "slope", std::string("unavailable (") + e.what() + ")");
        }
    }
    const bool ok = t.all_pass();
    line(o.summary, "result", ok ? "PASS" : "FAIL");
    o.status = ok ? exit_pass : exit_fail;
    std::ostringstream csv;
    t.write_csv(csv);
    o.artifacts.push_back({t.family + ".csv", csv.str()});
    return o;
}

Outcome cmd_stein_audit(const RunConfig& cfg) {
    if (cfg.samples < 1) throw UsageError("stein-audit: --samples must be >= 1");
    const SteinAudit a = stein_bound_audit(cfg.N, static_cast<std::size_t>(cfg.samples), cfg.seed);
    Outcome o;
    line(o.summary, "N", a.N);
    line(o.summary, "samples", fmt(static_cast<double>(a.rows.size())));
    line(o.summary, "L_N", a.constants.L_lemma);
    line(o.summary, "K_N", a.constants.K);
    line(o.summary, "max_g_ratio", a.max_g_ratio);
    line(o.summary, "max_gprime_ratio", a.max_gprime_ratio);
    line(o.summary, "violations", fmt(static_cast<double>(a.violations)));
    const bool ok = a.violations == 0;
    line(o.summary, "result", ok ? "PASS" : "FAIL");
    o.status = ok ? exit_pass : exit_fail;
    std::string csv = "sample,seed,lipschitz,sup_g,sup_dg,residual\n";
    for (const auto& r : a.rows)
        csv += std::to_string(r.sample) + ',' + std::to_string(r.seed) + ',' + fmt(r.lipschitz) + ',' + fmt(r.sup_g) +
               ',' + fmt(r.sup_dg) + ',' + fmt(r.residual) + '\n';
    o.artifacts.push_back({"stein_audit.csv", csv});
    return o;
}

Outcome cmd_tail_audit(const RunConfig& cfg) {
    if (cfg.grid < 2) throw UsageError("tail-audit: --grid must be >= 2");
    const std::vector<double> grid = tail_audit_grid(cfg.grid);
    const std::vector<TailMargin> ms = tail_bound_audit(cfg.N, grid);
    Outcome o;
    line(o.summary, "N", cfg.N);
    bool ok = true;
    std::string csv = "name,min_margin,arg_min,points\n";
    for (const auto& m : ms) {
        line(o.summary, m.name, m.min_margin);
        ok = ok && m.min_margin >= -1e-12;
        csv += m.name + ',' + fmt(m.min_margin) + ',' + fmt(m.arg_min) + ',' + std::to_string(m.points) + '\n';
    }
    line(o.summary, "result", ok ? "PASS" : "FAIL");
    o.status = ok ? exit_pass : exit_fail;
    o.artifacts.push_back({"tail_audit.csv", csv});
    return o;
}

Outcome cmd_counterexample(const RunConfig& cfg) {
    const CounterexampleRecord c = ou_counterexample(cfg.r);
    Outcome o;
    line(o.summary, "r", c.r);
    line(o.summary, "l1_f", c.l1_f);
    line(o.summary, "l1_Lf", c.l1_Lf);
    line(o.summary, "l1_Lf_exact", c.l1_Lf_exact);
    line(o.summary, "ratio", c.ratio);
    const bool ok = std::abs(c.l1_Lf - c.l1_Lf_exact) <= 1e-12;
    line(o.summary, "result", ok ? "PASS" : "FAIL");
    o.status = ok ? exit_pass : exit_fail;
    o.artifacts.push_back({"counterexample.csv", "r,l1_f,l1_Lf,l1_Lf_exact,ratio\n" + fmt(c.r) + ',' + fmt(c.l1_f) +
                                                     ',' + fmt(c.l1_Lf) + ',' + fmt(c.l1_Lf_exact) + ',' +
                                                     fmt(c.ratio) + '\n'});
    return o;
}

Outcome cmd_constants(const RunConfig& cfg) {
    Outcome o;
    o.summary = describe(constants_for(cfg.N));
    std::string csv = "key,value\n";
    std::istringstream is(o.summary);
    std::string l;
    while (std::getline(is, l)) {
        const auto eq = l.find(" = ");
        if (eq != std::string::npos) csv += l.substr(0, eq) + ',' + l.substr(eq + 3) + '\n';
    }
    o.artifacts.push_back({"constants.csv", csv});
    return o;
}

Outcome cmd_w1(const RunConfig& cfg) {
    const DiffusionModel m = build_model(cfg);
    const DiscreteOperator op = discretize(m, cfg.n, build_mapping(cfg, m));
    const GapResult g = spectral_gap(op);
    const TargetDistribution target = target_for(m.dimension());
    const std::optional<double> coupled = w1_monotone_coupling(op, g.f, target);
    const double w1 = coupled ? *coupled : w1_distance(pushforward_cells(op, g.f), target_measure(target));
    Outcome o;
    line(o.summary, "model", m.id());
    line(o.summary, "target", target.name());
    line(o.summary, "lambda1", g.lambda1);
    line(o.summary, "w1", w1);
    line(o.summary, "method", coupled ? "monotone_coupling" : "cdf");
    o.artifacts.push_back({"w1.csv", "model,target,lambda1,w1\n" + m.id() + ',' + target.name() + ',' +
                                         fmt(g.lambda1) + ',' + fmt(w1) + '\n'});
    return o;
}

const std::map<std::string, std::function<Outcome(const RunConfig&)>>& commands() {
    static const std::map<std::string, std::function<Outcome(const RunConfig&)>> table = {
        {"model-info", cmd_model_info}, {"cd-check", cmd_cd_check},         {"gap", cmd_gap},
        {"deficit", cmd_deficit},       {"stability", cmd_stability},       {"stein-audit", cmd_stein_audit},
        {"tail-audit", cmd_tail_audit}, {"counterexample", cmd_counterexample}, {"constants", cmd_constants},
        {"w1", cmd_w1}};
    return table;
}

std::string description(const std::string& name) {
    static const std::map<std::string, std::string> text = {
        {"model-info", "describe a model and its identity moments"},
        {"cd-check", "pointwise curvature-dimension margin of a model"},
        {"gap", "first eigenvalues of the discretized generator"},
        {"deficit", "eigenfunction deficit and the Bochner bound on ||Lh||_1"},
        {"stability", "rate table of a perturbation family"},
        {"stein-audit", "Stein solution bounds for random Lipschitz h (Cauchy, N < -1)"},
        {"tail-audit", "tail inequalities of the Cauchy laws on an arctan grid"},
        {"counterexample", "Ornstein-Uhlenbeck L1 counterexample at radius r"},
        {"constants", "explicit constants at dimension N"},
        {"w1", "W1 between the eigenfunction pushforward and the target law"}};
    return text.at(name);
}

void write_outputs(const RunConfig& cfg, const Outcome& o) {
    namespace fs = std::filesystem;
    const fs::path dir(cfg.out);
    fs::create_directories(dir);
    auto put = [&](const std::string& name, const std::string& content) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
        f << content;
    };
    for (const auto& [name, content] : o.artifacts) put(name, content);
    put("summary.txt", o.summary);
    put("config.txt", to_config_text(cfg));
}

}  // namespace

std::string to_config_text(const RunConfig& cfg) {
    std::string s;
    s += "command = " + cfg.command + '\n';
    s += "model = " + cfg.model + '\n';
    s += "N = " + fmt(cfg.N) + '\n';
    s += "kappa = " + fmt(cfg.kappa) + '\n';
    s += "quartic = " + fmt(cfg.quartic) + '\n';
    s += "radius = " + fmt(cfg.radius) + '\n';
    s += "delta = " + fmt(cfg.delta) + '\n';
    s += "bump = " + cfg.bump + '\n';
    s += "n = " + std::to_string(cfg.n) + '\n';
    s += "mapping = " + cfg.mapping + '\n';
    s += "deltas = " + join(cfg.deltas) + '\n';
    s += "seed = " + std::to_string(cfg.seed) + '\n';
    s += "out = " + cfg.out + '\n';
    s += "family = " + cfg.family + '\n';
    s += "p = " + fmt(cfg.p) + '\n';
    s += "c = " + fmt(cfg.c) + '\n';
    s += "r = " + fmt(cfg.r) + '\n';
    s += "samples = " + std::to_string(cfg.samples) + '\n';
    s += "grid = " + std::to_string(cfg.grid) + '\n';
    return s;
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string raw;
    int lineno = 0;
    auto to_int = [](const std::string& k, const std::string& v) {
        const double x = parse_double(k, v);
        if (x != std::floor(x) || std::abs(x) > 2e9) throw std::invalid_argument("config: " + k + " must be an integer");
        return static_cast<int>(x);
    };
    while (std::getline(is, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string l = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (l.empty()) continue;
        const auto eq = l.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string k = trim(l.substr(0, eq));
        const std::string v = trim(l.substr(eq + 1));
        if (k == "command") cfg.command = v;
        else if (k == "model") cfg.model = v;
        else if (k == "N") cfg.N = parse_double(k, v);
        else if (k == "kappa") cfg.kappa = parse_double(k, v);
        else if (k == "quartic") cfg.quartic = parse_double(k, v);
        else if (k == "radius") cfg.radius = parse_double(k, v);
        else if (k == "delta") cfg.delta = parse_double(k, v);
        else if (k == "bump") cfg.bump = v;
        else if (k == "n") cfg.n = to_int(k, v);
        else if (k == "mapping") cfg.mapping = v;
        else if (k == "deltas") cfg.deltas = parse_list(k, v);
        else if (k == "seed") {
            try {
                std::size_t used = 0;
                cfg.seed = std::stoull(v, &used);
                if (used != v.size()) throw std::invalid_argument(v);
            } catch (const std::exception&) {
                throw std::invalid_argument("config: bad seed: " + v);
            }
        } else if (k == "out") cfg.out = v;
        else if (k == "family") cfg.family = v;
        else if (k == "p") cfg.p = parse_double(k, v);
        else if (k == "c") cfg.c = parse_double(k, v);
        else if (k == "r") cfg.r = parse_double(k, v);
        else if (k == "samples") cfg.samples = to_int(k, v);
        else if (k == "grid") cfg.grid = to_int(k, v);
        else throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key " + k);
    }
    return cfg;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"gapstab: spectral gap stability audits for one-dimensional diffusions", "gapstab"};
    app.require_subcommand(1);

    RunConfig cli;
    std::string config_path;
    std::string deltas_text;
    std::vector<CLI::App*> subs;
    for (const auto& [name, fn] : commands()) {
        (void)fn;
        CLI::App* sub = app.add_subcommand(name, description(name));
        sub->add_option("--config", config_path, "key = value run configuration file");
        sub->add_option("--model", cli.model, "jacobi | cauchy | gaussian | scaled | phi_perturbed");
        sub->add_option("--N", cli.N, "dimension parameter");
        sub->add_option("--kappa", cli.kappa, "gaussian stiffness");
        sub->add_option("--quartic", cli.quartic, "gaussian quartic coefficient");
        sub->add_option("--radius", cli.radius, "scaled model radius");
        sub->add_option("--delta", cli.delta, "phi_perturbed amplitude");
        sub->add_option("--bump", cli.bump, "sine | quartic");
        sub->add_option("--n", cli.n, "resolution");
        sub->add_option("--mapping", cli.mapping, "direct | tan_compactify | truncate(R)");
        sub->add_option("--deltas", deltas_text, "comma separated family parameters");
        sub->add_option("--seed", cli.seed, "random seed");
        sub->add_option("--out", cli.out, "output directory for CSV and summary.txt");
        sub->add_option("--family", cli.family, "perturbation family");
        sub->add_option("--p", cli.p, "Lp exponent");
        sub->add_option("--c", cli.c, "integrability parameter");
        sub->add_option("--r", cli.r, "counterexample radius");
        sub->add_option("--samples", cli.samples, "random samples");
        sub->add_option("--grid", cli.grid, "audit grid points");
        subs.push_back(sub);
    }

    std::vector<const char*> argv{"gapstab"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_pass;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return exit_usage;
    }

    CLI::App* sub = nullptr;
    for (CLI::App* s : subs)
        if (s->parsed()) sub = s;
    if (sub == nullptr) {
        err << app.help();
        return exit_usage;
    }

    RunConfig cfg;
    try {
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw UsageError("cannot read config file " + config_path);
            std::stringstream ss;
            ss << f.rdbuf();
            cfg = parse_config_text(ss.str());
        }
        // Explicit flags override the file.
        auto given = [&](const char* flag) { return sub->count(flag) > 0; };
        if (given("--model")) cfg.model = cli.model;
        if (given("--N")) cfg.N = cli.N;
        if (given("--kappa")) cfg.kappa = cli.kappa;
        if (given("--quartic")) cfg.quartic = cli.quartic;
        if (given("--radius")) cfg.radius = cli.radius;
        if (given("--delta")) cfg.delta = cli.delta;
        if (given("--bump")) cfg.bump = cli.bump;
        if (given("--n")) cfg.n = cli.n;
        if (given("--mapping")) cfg.mapping = cli.mapping;
        if (given("--deltas")) cfg.deltas = parse_list("deltas", deltas_text);
        if (given("--seed")) cfg.seed = cli.seed;
        if (given("--out")) cfg.out = cli.out;
        if (given("--family")) cfg.family = cli.family;
        if (given("--p")) cfg.p = cli.p;
        if (given("--c")) cfg.c = cli.c;
        if (given("--r")) cfg.r = cli.r;
        if (given("--samples")) cfg.samples = cli.samples;
        if (given("--grid")) cfg.grid = cli.grid;
        cfg.command = sub->get_name();
        if (cfg.n < 8) throw UsageError("--n must be at least 8");
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }

    Outcome o;
    try {
        o = commands().at(cfg.command)(cfg);
    } catch (const std::logic_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_fail;
    }
    out << o.summary;
    if (!cfg.out.empty()) {
        try {
            write_outputs(cfg, o);
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return exit_fail;
        }
    }
    return o.status;
}

}  // namespace gapstab
