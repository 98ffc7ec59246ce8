#include <cmath>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oscnorm/error.hpp"
#include "oscnorm/generators.hpp"
#include "oscnorm/io.hpp"
#include "oscnorm/norms.hpp"
#include "oscnorm/rearrangement.hpp"
#include "oscnorm/suites.hpp"

using namespace oscnorm;

namespace {

double parse_p(const std::string& s) {
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw Error("cannot parse exponent '" + s + "'");
    return v;
}

void emit(const Json& j, const std::string& out) {
    if (out.empty()) std::cout << dump(j);
    else write_json(j, out);
}

struct ComputeArgs {
    std::string input, norm, p = "2", mode = "exact", convention, out;
    int k = 1, q = 1;
    double lambda = 0.0;
};

int compute(const ComputeArgs& a) {
    const GridFunction f = load_function(a.input);
    const double p = parse_p(a.p);
    Json j;
    j["schema"] = kSchemaVersion;
    j["norm"] = a.norm;
    const bool exact = a.mode == "exact";
    if (a.mode != "exact" && a.mode != "bounds") throw Error("mode must be exact or bounds");

    auto sparse = [&](NormParams params) {
        if (!a.convention.empty()) params.convention = a.convention == "V" ? ExponentConvention::V : ExponentConvention::SV;
        const NormReport r = exact ? sparse_sup_exhaustive(f, params) : sparse_norm_bounds(f, params);
        return to_json(r);
    };
    auto packing = [&](NormParams params) {
        if (!a.convention.empty()) params.convention = a.convention == "V" ? ExponentConvention::V : ExponentConvention::SV;
        return to_json(packing_sup_norm(f, params));
    };

    if (a.norm == "jn") j["report"] = packing(NormParams::jn(p));
    else if (a.norm == "bmo") j["report"] = packing(NormParams::bmo());
    else if (a.norm == "v") j["report"] = packing(NormParams::v(a.k, a.q, a.lambda, p));
    else if (a.norm == "sjn") j["report"] = sparse(NormParams::sjn(p));
    else if (a.norm == "sv") j["report"] = sparse(NormParams::sv(a.k, a.q, a.lambda, p));
    else if (a.norm == "svt") j["report"] = sparse(NormParams::svt(f.dimension(), a.k, a.q, a.lambda, p));
    else if (a.norm == "garo") j["report"] = to_json(garo_norm(f, p));
    else if (a.norm == "weaklp") {
        const auto r = ri_functionals(f, p);
        j["report"] = {{"weak_lp", r.weak_lp}, {"llogl", r.llogl}, {"bds", r.bds}, {"p", p}};
    } else if (a.norm == "llogl") {
        j["report"] = {{"llogl", llogl_norm(f)}, {"young_function", "t*log(e+t)"}};
    } else {
        throw Error("unknown norm '" + a.norm + "'");
    }
    emit(j, a.out);
    return 0;
}

struct VerifyArgs {
    std::string suite, out, generator, input;
    int dim = 1, depth = 2, trials = 100, k = 1, q = 1;
    std::uint64_t seed = 0;
    std::vector<std::string> p;
    std::vector<double> lambda;
    unsigned threads = 0;
};

int verify(const VerifyArgs& a) {
    SuiteConfig c;
    c.suite = suite_from_name(a.suite);
    c.dimension = a.dim;
    c.depth = a.depth;
    c.trials = a.trials;
    c.seed = a.seed;
    for (const auto& s : a.p) c.p.push_back(parse_p(s));
    c.k = a.k;
    c.q = a.q;
    if (!a.lambda.empty()) c.lambda = a.lambda.front();
    if (!a.generator.empty()) c.generator = generator_from_name(a.generator);
    else if (!a.input.empty()) c.generator = Generator::custom_file;
    else if (c.suite == Suite::jn_extrapolation) c.generator = Generator::log_singularity;
    c.input_path = a.input;
    c.threads = a.threads;

    const SuiteReport report = run_suite(c);
    const Json j = to_json(report);
    if (!a.out.empty()) write_json(j, a.out);
    for (const auto& as : report.assertions)
        std::cout << (as.passed() ? "PASS " : "FAIL ") << as.name << "  (" << as.checked << " checked, " << as.violations
                  << " violations)\n";
    for (const auto& [name, s] : report.stats)
        std::cout << "stat " << name << "  min " << s.min << "  max " << s.max << "  n " << s.count << "\n";
    std::cout << (report.passed() ? "suite passed" : "suite FAILED") << "\n";
    return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Oscillation functionals on dyadic grids"};
    app.require_subcommand(1);

    ComputeArgs ca;
    auto* cmp = app.add_subcommand("compute", "Evaluate one functional of a grid function");
    cmp->add_option("--input", ca.input, "Grid function JSON")->required();
    cmp->add_option("--norm", ca.norm, "jn|sjn|v|sv|svt|garo|bmo|weaklp|llogl")->required();
    cmp->add_option("--p", ca.p, "Outer exponent (number or inf)");
    cmp->add_option("--k", ca.k, "Polynomial degree bound");
    cmp->add_option("--q", ca.q, "Local error exponent (1 or 2)");
    cmp->add_option("--lambda", ca.lambda, "Fractional order");
    cmp->add_option("--mode", ca.mode, "exact|bounds");
    cmp->add_option("--convention", ca.convention, "V|SV exponent convention");
    cmp->add_option("--out", ca.out, "Write the report here instead of stdout");

    VerifyArgs va;
    auto* ver = app.add_subcommand("verify", "Run a verification suite");
    ver->add_option("--suite", va.suite,
                    "sparse-jn|sv-equivalence|fractional-sv|jn-extrapolation|sobolev-chain|embedding-chain|riesz")
        ->required();
    ver->add_option("--dim", va.dim, "Dimension");
    ver->add_option("--depth", va.depth, "Finest level");
    ver->add_option("--trials", va.trials, "Number of trials");
    ver->add_option("--seed", va.seed, "PRNG seed");
    ver->add_option("--out", va.out, "Report JSON path");
    ver->add_option("--p", va.p, "Outer exponents (repeatable)");
    ver->add_option("--k", va.k, "Polynomial degree bound");
    ver->add_option("--q", va.q, "Local error exponent");
    ver->add_option("--lambda", va.lambda, "Fractional order");
    ver->add_option("--generator", va.generator, "uniform-iid|step|log-singularity|indicator|custom-file");
    ver->add_option("--input", va.input, "Grid function JSON for custom-file");
    ver->add_option("--threads", va.threads, "Worker threads (0: all cores)");

    std::string mi, mout;
    int mq = 1;
    double ml = 0.0;
    auto* mx = app.add_subcommand("maximal", "Dyadic fractional maximal function");
    mx->add_option("--input", mi, "Grid function JSON")->required();
    mx->add_option("--q", mq, "Exponent (1 or 2)");
    mx->add_option("--lambda", ml, "Fractional order in [0, n)");
    mx->add_option("--out", mout, "Write here instead of stdout");

    std::string gname = "uniform-iid", gout, ginput;
    int gdim = 1, gdepth = 2;
    std::uint64_t gseed = 0;
    auto* gen = app.add_subcommand("generate", "Write a generated grid function");
    gen->add_option("--generator", gname, "uniform-iid|step|log-singularity|indicator|custom-file");
    gen->add_option("--dim", gdim, "Dimension");
    gen->add_option("--depth", gdepth, "Finest level");
    gen->add_option("--seed", gseed, "PRNG seed");
    gen->add_option("--input", ginput, "Source JSON for custom-file");
    gen->add_option("--out", gout, "Write here instead of stdout");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*cmp) return compute(ca);
        if (*ver) return verify(va);
        if (*mx) {
            Json j = to_json(fractional_maximal(load_function(mi), mq, ml));
            j["schema"] = kSchemaVersion;
            emit(j, mout);
            return 0;
        }
        if (*gen) {
            const GridFunction f = generate({generator_from_name(gname), gdim, gdepth, ginput}, gseed);
            emit(to_json(f), gout);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
