#include "oscnorm/suites.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <sstream>
#include <thread>

#include "oscnorm/error.hpp"
#include "oscnorm/norms.hpp"
#include "oscnorm/rearrangement.hpp"

namespace oscnorm {

namespace {

constexpr double kTol = 1e-10;

struct TrialOutput {
    Json rows = Json::array();
    std::vector<std::pair<std::string, double>> samples;
    std::vector<std::pair<std::string, bool>> checks;

    void sample(const std::string& name, double v) { samples.emplace_back(name, v); }
    void check(const std::string& name, bool ok) { checks.emplace_back(name, ok); }
};

bool leq(double a, double b) { return a <= b + kTol * std::max(1.0, std::abs(b)); }

std::string tag(const std::string& base, double p) {
    std::ostringstream os;
    os << base << "_p";
    if (std::isinf(p)) os << "inf";
    else os << p;
    return os.str();
}

std::vector<double> p_list(const SuiteConfig& c, std::vector<double> fallback) { return c.p.empty() ? fallback : c.p; }

void require_oracle_scale(const SuiteConfig& c) {
    const DyadicTree tree(c.dimension, c.depth);
    if (tree.node_count() > kMaxSubsetEnumerationNodes)
        throw Error("suite " + suite_name(c.suite) + " runs at oracle scale only (at most 15 dyadic nodes)");
}

PolyFit mean_fit(const MomentTable& table) {
    const GridFunction& f = table.function();
    return constant_fit(f.dimension(), unit_cube, table.average(unit_cube), 1);
}

GridFunction residual_function(const GridFunction& f, double c) {
    std::vector<double> v(f.values().begin(), f.values().end());
    for (auto& x : v) x -= c;
    return GridFunction(f.dimension(), f.depth(), std::move(v));
}

GridFunction coarsen(const GridFunction& f, int levels) {
    const int n = f.dimension(), L = f.depth() - levels;
    std::vector<double> v;
    const std::int64_t side_count = std::int64_t{1} << L;
    for (std::int64_t i = 0; i < side_count; ++i)
        for (std::int64_t j = 0; j < (n == 2 ? side_count : 1); ++j) v.push_back(average(f, CubeId{L, {i, j}}));
    return GridFunction(n, L, std::move(v));
}

void run_riesz(const GridFunction& f, const SuiteConfig& c, int t, TrialOutput& out) {
    const MomentTable table(f, 4);
    for (double p : p_list(c, {1.0, 2.0, 4.0})) {
        const auto rep = packing_sup_norm(table, NormParams::riesz(p));
        const double ref = lp_norm(f, p);
        const double rel = ref == 0.0 ? rep.value_lower : std::abs(rep.value_lower - ref) / ref;
        out.check("riesz identity", rel <= 1e-10);
        out.sample("riesz_relative_error", rel);
        out.rows.push_back({{"trial", t}, {"p", p}, {"packing_sup", rep.value_lower}, {"lp_norm", ref},
                            {"witness", to_json(rep.witness)}});
    }
}

void run_sparse_jn(const GridFunction& f, const SuiteConfig& c, int t, TrialOutput& out) {
    const MomentTable table(f, 4);
    const PolyFit P = reference_polynomial(table, 1, 1);
    for (double p : p_list(c, {1.0, 2.0, 4.0})) {
        const NormParams params = NormParams::sjn(p);
        const auto s = scaled_local_errors(table, params);
        const auto rep = sparse_sup_exhaustive(table, params, &s);
        const double S = rep.value_lower;
        const double M = maximal_residual_norm(f, P, 1, 0.0, p);
        out.check("sparse sup <= 2 ||M(f - median)||_p", leq(S, 2.0 * M));
        if (M > 0.0) out.sample(tag("upper_ratio", p), S / (2.0 * M));
        if (S > 1e-12) out.sample(tag("lower_ratio", p), M / (p * S));

        const auto forms = compare_sparse_forms(table, params, kTol, &s);
        out.check("|E|-form <= |Q|-form <= 2^(1/p) |E|-form", forms.violations == 0);
        out.sample(tag("form_ratio", p), forms.max_ratio);

        const double jn = packing_sup_norm(table, NormParams::jn(p)).value_lower;
        out.check("packing sup <= sparse sup", leq(jn, S));
        const double audit = evaluate_family(f, params, rep.witness);
        out.check("witness recomputes the value", std::abs(audit - S) <= 1e-12 * std::max(1.0, S));
        const auto bounds = sparse_norm_bounds(f, params);
        out.check("bounds enclose the exhaustive value", leq(bounds.value_lower, S) && leq(S, bounds.value_upper));

        out.rows.push_back({{"trial", t},
                            {"p", p},
                            {"sjn", S},
                            {"q_form", *rep.q_weighted},
                            {"maximal_residual", M},
                            {"twice_maximal", 2.0 * M},
                            {"ratio", M > 0.0 ? S / (2.0 * M) : 0.0},
                            {"bounds", {bounds.value_lower, bounds.value_upper}},
                            {"witness", to_json(rep.witness)}});
    }
}

void run_sv_equivalence(const GridFunction& f, const SuiteConfig& c, int t, TrialOutput& out) {
    const MomentTable table(f, 4);
    const double lambda = c.lambda.value_or(0.0);
    const PolyFit P = reference_polynomial(table, c.k, c.q);
    out.sample("reference_near_best_factor", P.near_best_factor);
    std::vector<double> s;
    for (double p : p_list(c, {1.0, 2.0, 4.0})) {
        const NormParams params = NormParams::sv(c.k, c.q, lambda, p);
        if (s.empty()) s = scaled_local_errors(table, params);
        const auto rep = sparse_sup_exhaustive(table, params, &s);
        const double S = rep.value_lower;
        const double M = maximal_residual_norm(f, P, c.q, lambda, p);
        out.check("SV <= 2 ||M_{q,lambda}(f - P f)||_p", leq(S, 2.0 * M));
        if (S > 1e-12) out.sample(tag("lower_ratio", p), M / S);
        if (M > 0.0) out.sample(tag("upper_ratio", p), S / (2.0 * M));
        if (c.q == 1 || lambda == 0.0) {
            const double V = packing_sup_norm(table, NormParams::v(c.k, c.q, lambda, p)).value_lower;
            out.check("V <= SV", leq(V, S));
        }
        const auto bounds = sparse_norm_bounds(f, params);
        out.check("bounds enclose the exhaustive value", leq(bounds.value_lower, S) && leq(S, bounds.value_upper));
        out.rows.push_back({{"trial", t},
                            {"p", p},
                            {"sv", S},
                            {"maximal_residual", M},
                            {"bounds", {bounds.value_lower, bounds.value_upper}},
                            {"witness", to_json(rep.witness)}});
    }
}

void run_fractional_sv(const GridFunction& f, const SuiteConfig& c, int t, TrialOutput& out) {
    const MomentTable table(f, 4);
    const int n = f.dimension();
    const PolyFit P = reference_polynomial(table, c.k, c.q);
    std::vector<double> lambdas = c.lambda ? std::vector<double>{*c.lambda} : std::vector<double>{0.0, n / 2.0};
    for (double lambda : lambdas) {
        std::vector<double> s;
        for (double p : p_list(c, {1.0, 2.0, 4.0})) {
            const NormParams sv = NormParams::sv(c.k, c.q, lambda, p);
            const NormParams svt = NormParams::svt(n, c.k, c.q, lambda, p);
            if (s.empty()) s = scaled_local_errors(table, sv);
            const auto a = sparse_sup_exhaustive(table, svt, &s);
            const auto b = sparse_sup_exhaustive(table, sv, &s);
            const double M = maximal_residual_norm(f, P, c.q, lambda, p);
            out.check("fractional SV <= SV", leq(a.value_lower, b.value_lower));
            out.check("fractional SV <= 2 ||M_{q,lambda}(f - P f)||_p", leq(a.value_lower, 2.0 * M));
            out.rows.push_back({{"trial", t},
                                {"lambda", lambda},
                                {"p", p},
                                {"svt", a.value_lower},
                                {"sv", b.value_lower},
                                {"maximal_residual", M},
                                {"witness", to_json(a.witness)}});
        }
    }
}

void run_jn_extrapolation(const GridFunction& f, const SuiteConfig& c, int t, TrialOutput& out) {
    if (f.depth() < 2) throw Error("jn-extrapolation needs depth >= 2");
    const auto ps = p_list(c, {2.0, 4.0, 8.0, 16.0});
    std::vector<double> max_ratio;
    for (int drop : {2, 0}) {
        const GridFunction g = drop ? coarsen(f, drop) : f;
        const MomentTable table(g, 0);
        const double bmo = bmo_norm(g);
        const double dp = packing_sup_norm(table, NormParams::bmo()).value_lower;
        out.check("p = infinity packing sup equals BMO", std::abs(dp - bmo) <= 1e-12 * std::max(1.0, bmo));
        const GridFunction r = residual_function(g, table.average(unit_cube));
        double worst = 0.0, previous = -1.0;
        for (double p : ps) {
            const double ratio = bmo > 0.0 ? lp_norm(r, p) / (p * bmo) : 0.0;
            if (previous >= 0.0) out.check("ratio does not grow in p", ratio <= 1.05 * previous + kTol);
            previous = ratio;
            worst = std::max(worst, ratio);
            out.rows.push_back({{"trial", t}, {"depth", g.depth()}, {"p", p}, {"bmo", bmo}, {"ratio", ratio}});
        }
        max_ratio.push_back(worst);
        out.sample("max_ratio_depth" + std::to_string(g.depth()), worst);

        // Distribution of |f - f_Q0| at thresholds j * BMO.
        if (bmo > 0.0) {
            const double cell = g.cell_measure();
            auto level = [&](double s) {
                double m = 0.0;
                for (double v : r.values()) m += std::abs(v) > s ? cell : 0.0;
                return m;
            };
            for (int j = 1;; ++j) {
                const double a = level(j * bmo), b = level((j + 1) * bmo);
                if (b < 16.0 * cell) break;
                out.check("distribution decays geometrically", b <= 0.75 * a);
                out.sample("decay_ratio", b / a);
            }
        }
    }
    out.check("calibration stable across depth", max_ratio[1] <= 1.05 * max_ratio[0] + kTol);
}

void run_sobolev_chain(const GridFunction& f, const SuiteConfig&, int t, TrialOutput& out) {
    if (f.dimension() != 1) throw Error("sobolev-chain is instantiated for n = 1");
    const double lambda = 0.5, p = 4.0 / 3.0, q = 4.0;
    const MomentTable table(f, 4);
    const PolyFit mean = mean_fit(table);
    const double Ml = maximal_residual_norm(f, mean, 1, lambda, q);
    const auto sv_lambda = sparse_sup_exhaustive(table, NormParams::sv(1, 1, lambda, q));
    const auto sv_zero = sparse_sup_exhaustive(table, NormParams::sv(1, 1, 0.0, p));
    const double M0 = maximal_residual_norm(f, mean, 1, 0.0, p);
    const double lp = lp_norm(residual_function(f, table.average(unit_cube)), p);
    const double hedberg = std::pow(p / (p - 1.0), p / q);

    const double a = sv_lambda.value_lower, b = *sv_lambda.q_weighted;
    const double c0 = *sv_zero.q_weighted, d = sv_zero.value_lower;
    out.check("A: SV^{1,lambda}_{q,1} <= 2 ||M_lambda(f - f_Q0)||_q", leq(a, 2.0 * Ml));
    out.check("B: |E|-form <= |Q|-form", leq(a, b));
    out.check("C: |Q|-form at (lambda, q) <= |Q|-form at (0, p)", leq(b, c0));
    out.check("D: |Q|-form at (0, p) <= 2^(1/p) SJN_p", leq(c0, std::pow(2.0, 1.0 / p) * d));
    out.check("E: SJN_p <= 2 ||M(f - f_Q0)||_p", leq(d, 2.0 * M0));
    out.check("E: ||f - f_Q0||_p <= ||M(f - f_Q0)||_p", leq(lp, M0));
    out.check("end to end: ||M_lambda(f - f_Q0)||_q <= C ||f - f_Q0||_p", leq(Ml, hedberg * lp));
    if (lp > 0.0) out.sample("end_to_end_ratio", Ml / lp);
    out.rows.push_back({{"trial", t},
                        {"maximal_lambda_q", Ml},
                        {"sv_lambda_e_form", a},
                        {"sv_lambda_q_form", b},
                        {"sv_zero_q_form", c0},
                        {"sjn_p", d},
                        {"maximal_p", M0},
                        {"residual_p", lp},
                        {"constant", hedberg}});
}

void run_embedding_chain(const GridFunction& f, const SuiteConfig& c, int t, TrialOutput& out) {
    const MomentTable table(f, 4);
    const GridFunction centered = residual_function(f, table.average(unit_cube));
    for (double p : p_list(c, {2.0, 4.0})) {
        const double garo = garo_norm(f, p).value_lower;
        const double jn = packing_sup_norm(table, NormParams::jn(p)).value_lower;
        const double sjn = sparse_sup_exhaustive(table, NormParams::sjn(p)).value_lower;
        out.check("GaRo <= JN_p", leq(garo, jn));
        out.check("JN_p <= SJN_p", leq(jn, sjn));
        const double weak = weak_lp_norm(centered, p);
        if (garo > 1e-12) out.sample(tag("weak_over_garo", p), weak / garo);
        out.rows.push_back(
            {{"trial", t}, {"p", p}, {"garo", garo}, {"jn", jn}, {"sjn", sjn}, {"weak_lp", weak}});
    }
    const double bmo = bmo_norm(f);
    out.check("p = infinity packing sup equals BMO",
              std::abs(packing_sup_norm(table, NormParams::bmo()).value_lower - bmo) <= 1e-12 * std::max(1.0, bmo));
    const double sjn1 = sparse_sup_exhaustive(table, NormParams::sjn(1.0)).value_lower;
    const double llogl = llogl_norm(residual_function(f, midpoint_median(f)));
    if (llogl > 1e-12) out.sample("sjn1_over_llogl", sjn1 / llogl);
    out.rows.push_back({{"trial", t}, {"bmo", bmo}, {"bds", bds_functional(f)}, {"sjn1", sjn1}, {"llogl", llogl}});
}

using Runner = std::function<void(const GridFunction&, const SuiteConfig&, int, TrialOutput&)>;

Runner runner_for(Suite s) {
    switch (s) {
        case Suite::riesz: return run_riesz;
        case Suite::sparse_jn: return run_sparse_jn;
        case Suite::sv_equivalence: return run_sv_equivalence;
        case Suite::fractional_sv: return run_fractional_sv;
        case Suite::jn_extrapolation: return run_jn_extrapolation;
        case Suite::sobolev_chain: return run_sobolev_chain;
        case Suite::embedding_chain: return run_embedding_chain;
    }
    throw Error("unknown suite");
}

}  // namespace

Suite suite_from_name(const std::string& name) {
    for (Suite s : {Suite::sparse_jn, Suite::sv_equivalence, Suite::fractional_sv, Suite::jn_extrapolation,
                    Suite::sobolev_chain, Suite::embedding_chain, Suite::riesz})
        if (suite_name(s) == name) return s;
    throw Error("unknown suite '" + name + "'");
}

std::string suite_name(Suite s) {
    switch (s) {
        case Suite::sparse_jn: return "sparse-jn";
        case Suite::sv_equivalence: return "sv-equivalence";
        case Suite::fractional_sv: return "fractional-sv";
        case Suite::jn_extrapolation: return "jn-extrapolation";
        case Suite::sobolev_chain: return "sobolev-chain";
        case Suite::embedding_chain: return "embedding-chain";
        case Suite::riesz: return "riesz";
    }
    return "";
}

void Stat::add(double v) {
    min = std::min(min, v);
    max = std::max(max, v);
    ++count;
}

bool SuiteReport::passed() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed(); });
}

const Stat& SuiteReport::stat(const std::string& name) const {
    auto it = stats.find(name);
    if (it == stats.end()) throw Error("report has no statistic '" + name + "'");
    return it->second;
}

const Assertion& SuiteReport::assertion(const std::string& name) const {
    for (const auto& a : assertions)
        if (a.name == name) return a;
    throw Error("report has no assertion '" + name + "'");
}

GridFunction trial_function(const SuiteConfig& config, int trial) {
    GeneratorSpec spec{config.generator, config.dimension, config.depth, config.input_path};
    return generate(spec, trial_seed(config.seed, static_cast<std::uint64_t>(trial)));
}

SuiteReport run_suite(const SuiteConfig& config) {
    if (config.trials < 1) throw Error("trials must be positive");
    if (config.dimension != 1 && config.dimension != 2) throw Error("dimension must be 1 or 2");
    if (config.depth < 0) throw Error("depth must be nonnegative");
    SuiteConfig cfg = config;
    if (cfg.generator == Generator::custom_file) {
        const GridFunction probe = load_function(cfg.input_path);
        cfg.dimension = probe.dimension();
        cfg.depth = probe.depth();
    }
    switch (cfg.suite) {
        case Suite::sparse_jn:
        case Suite::sv_equivalence:
        case Suite::fractional_sv:
        case Suite::sobolev_chain:
        case Suite::embedding_chain: require_oracle_scale(cfg); break;
        case Suite::jn_extrapolation:
            if (cfg.depth < 2) throw Error("jn-extrapolation needs depth >= 2");
            break;
        case Suite::riesz: break;
    }
    if (cfg.suite == Suite::sobolev_chain && cfg.dimension != 1) throw Error("sobolev-chain is instantiated for n = 1");
    if (cfg.suite == Suite::fractional_sv && cfg.lambda && !(*cfg.lambda >= 0.0 && *cfg.lambda < cfg.dimension))
        throw Error("lambda must lie in [0, n)");

    const Runner run = runner_for(cfg.suite);
    std::vector<TrialOutput> outputs(static_cast<std::size_t>(cfg.trials));
    std::vector<std::string> errors(outputs.size());
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int t = next++; t < cfg.trials; t = next++) {
            try {
                run(trial_function(cfg, t), cfg, t, outputs[static_cast<std::size_t>(t)]);
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(t)] = e.what();
            }
        }
    };
    unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.trials));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (!e.empty()) throw Error(e);

    SuiteReport report;
    report.config = cfg;
    std::map<std::string, Assertion> checks;
    for (auto& o : outputs) {
        if (cfg.keep_rows)
            for (auto& row : o.rows) report.rows.push_back(std::move(row));
        for (const auto& [name, v] : o.samples) report.stats[name].add(v);
        for (const auto& [name, ok] : o.checks) {
            auto& a = checks[name];
            a.name = name;
            ++a.checked;
            if (!ok) ++a.violations;
        }
    }
    for (auto& [name, a] : checks) report.assertions.push_back(a);
    return report;
}

Json to_json(const SuiteConfig& c) {
    Json j;
    j["suite"] = suite_name(c.suite);
    j["dimension"] = c.dimension;
    j["depth"] = c.depth;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["p"] = c.p;
    j["k"] = c.k;
    j["q"] = c.q;
    if (c.lambda) j["lambda"] = *c.lambda;
    j["generator"] = generator_name(c.generator);
    if (c.generator == Generator::custom_file) j["input"] = c.input_path;
    j["prng"] = "splitmix64";
    return j;
}

Json to_json(const SuiteReport& report) {
    Json j;
    j["schema"] = kSchemaVersion;
    j["suite"] = suite_name(report.config.suite);
    j["config"] = to_json(report.config);
    j["rows"] = report.rows;
    Json stats = Json::object();
    std::size_t violations = 0;
    for (const auto& [name, s] : report.stats) stats[name] = {{"min", s.min}, {"max", s.max}, {"count", s.count}};
    Json assertions = Json::array();
    for (const auto& a : report.assertions) {
        violations += a.violations;
        assertions.push_back({{"name", a.name}, {"checked", a.checked}, {"violations", a.violations}, {"passed", a.passed()}});
    }
    j["aggregate"] = {{"stats", stats}, {"violations", violations}};
    j["assertions"] = assertions;
    j["passed"] = report.passed();
    return j;
}

}  // namespace oscnorm
