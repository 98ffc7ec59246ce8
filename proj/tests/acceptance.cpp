#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "oscnorm/families.hpp"
#include "oscnorm/maximal_ops.hpp"
#include "oscnorm/norms.hpp"
#include "oscnorm/suites.hpp"

using namespace oscnorm;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

SuiteReport suite(Suite s, int n, int L, int trials, std::uint64_t seed, std::vector<double> p = {}) {
    SuiteConfig c;
    c.suite = s;
    c.dimension = n;
    c.depth = L;
    c.trials = trials;
    c.seed = seed;
    c.p = std::move(p);
    c.keep_rows = false;
    if (s == Suite::jn_extrapolation) c.generator = Generator::log_singularity;
    return run_suite(c);
}

std::size_t violations(const SuiteReport& r, std::size_t* checked = nullptr) {
    std::size_t v = 0;
    for (const auto& a : r.assertions) {
        v += a.violations;
        if (checked) *checked += a.checked;
    }
    return v;
}

double max_over(const SuiteReport& r, const std::string& prefix) {
    double m = 0.0;
    for (const auto& [name, s] : r.stats)
        if (name.rfind(prefix, 0) == 0) m = std::max(m, s.max);
    return m;
}

Outcome riesz() {
    std::size_t checked = 0, bad = 0;
    for (auto [n, L] : {std::pair{1, 3}, std::pair{2, 2}}) {
        const auto r = suite(Suite::riesz, n, L, 100, 1);
        bad += violations(r, &checked);
    }
    return {bad == 0, fmt("%zu/%zu packing sups equal ||f||_p to 1e-10", checked - bad, checked)};
}

// Criteria 2, 3 and 4 share the sparse-jn runs.
struct SparseRuns {
    std::vector<SuiteReport> oracle;  // L = 1, 2, 3 with 1000 grids each
    SuiteReport calibration;          // L = 2 with 10000 grids
};

SparseRuns& sparse_runs() {
    static SparseRuns runs = [] {
        SparseRuns r;
        for (int L = 1; L <= 3; ++L) r.oracle.push_back(suite(Suite::sparse_jn, 1, L, 1000, 2));
        r.calibration = suite(Suite::sparse_jn, 1, 2, 10000, 3);
        return r;
    }();
    return runs;
}

Outcome upper_factor_two() {
    std::size_t checked = 0, bad = 0;
    double worst = 0.0;
    for (const auto& r : sparse_runs().oracle) {
        const auto& a = r.assertion("sparse sup <= 2 ||M(f - median)||_p");
        checked += a.checked;
        bad += a.violations;
        worst = std::max(worst, max_over(r, "upper_ratio"));
    }
    return {bad == 0, fmt("%zu violations in %zu checks, max SJN/(2||M(f-med)||) = %.6f", bad, checked, worst)};
}

Outcome lower_calibrated() {
    const double C = max_over(sparse_runs().calibration, "lower_ratio");
    const double R3 = max_over(sparse_runs().oracle[2], "lower_ratio");
    return {R3 <= 1.05 * C, fmt("C = %.6f at L=2 (10000 grids), max R = %.6f at L=3, ratio %.4f <= 1.05", C, R3, R3 / C)};
}

Outcome form_comparison() {
    std::size_t checked = 0, bad = 0;
    double worst = 0.0;
    for (const auto& r : sparse_runs().oracle) {
        const auto& a = r.assertion("|E|-form <= |Q|-form <= 2^(1/p) |E|-form");
        checked += a.checked;
        bad += a.violations;
    }
    const auto& c = sparse_runs().calibration.assertion("|E|-form <= |Q|-form <= 2^(1/p) |E|-form");
    checked += c.checked;
    bad += c.violations;
    for (const auto& [name, s] : sparse_runs().oracle[2].stats)
        if (name.rfind("form_ratio_p", 0) == 0) {
            const double p = std::stod(name.substr(12));
            worst = std::max(worst, s.max / std::pow(2.0, 1.0 / p));
        }
    return {bad == 0, fmt("%zu grid/p instances, %zu with a violating family, max |Q|/(2^(1/p)|E|) = %.6f", checked, bad,
                          worst)};
}

Outcome embedding_chain() {
    const auto cal = suite(Suite::embedding_chain, 1, 2, 10000, 5);
    const auto chk = suite(Suite::embedding_chain, 1, 3, 1000, 5);
    std::size_t bad = 0;
    for (const auto* r : {&cal, &chk})
        bad += r->assertion("GaRo <= JN_p").violations + r->assertion("JN_p <= SJN_p").violations;
    const double C = max_over(cal, "weak_over_garo"), C3 = max_over(chk, "weak_over_garo");
    return {bad == 0 && C3 <= 1.05 * C,
            fmt("%zu chain violations; C' = %.6f at L=2, max %.6f at L=3, ratio %.4f <= 1.05", bad, C, C3, C3 / C)};
}

Outcome fractional() {
    std::size_t checked = 0, bad = 0;
    for (auto [n, L] : {std::pair{1, 1}, std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 1}})
        bad += violations(suite(Suite::fractional_sv, n, L, 1000, 6), &checked);
    return {bad == 0, fmt("%zu violations in %zu checks (lambda in {0, n/2}, p in {1,2,4})", bad, checked)};
}

// Sums of the weights over every antichain of the subtree at `b`, the empty one included.
std::vector<double> antichain_sums(const std::vector<oracle::Box>& boxes, const std::vector<double>& w, std::size_t b,
                                   int L) {
    if (boxes[b].level == L) return {0.0, w[b]};
    std::vector<double> combos{0.0};
    for (std::size_t c = 0; c < boxes.size(); ++c) {
        if (boxes[c].level != boxes[b].level + 1 || !oracle::inside(boxes[c], boxes[b])) continue;
        const auto sub = antichain_sums(boxes, w, c, L);
        std::vector<double> next;
        next.reserve(combos.size() * sub.size());
        for (double x : combos)
            for (double y : sub) next.push_back(x + y);
        combos = std::move(next);
    }
    combos.push_back(w[b]);
    return combos;
}

Outcome dp_oracle() {
    const std::vector<std::pair<int, int>> shapes{{1, 0}, {1, 1}, {1, 2}, {1, 3}, {1, 4}, {1, 5}, {2, 1}, {2, 2}};
    const double ps[] = {1.0, 2.0, 4.0};
    int worst_trial = -1;
    double worst = 0.0;
    std::size_t bad = 0;
    for (int t = 0; t < 500; ++t) {
        const auto [n, L] = shapes[static_cast<std::size_t>(t) % shapes.size()];
        const double p = ps[t % 3];
        const GridFunction f = oracle::random_function(n, L, trial_seed(7, static_cast<std::uint64_t>(t)));
        const auto boxes = oracle::all_boxes(n, L);
        std::vector<double> w;
        for (const auto& b : boxes) {
            const double m = oracle::box_measure(b, n);
            w.push_back(std::pow(oracle::mean_osc_mass(f, b) / m, p) * m);
        }
        // The root's antichains are {Q0} and unions of antichains of its subtrees, so the
        // maximum splits over the subtrees once the full product gets too large.
        double best = w[0];
        double split = 0.0;
        std::vector<double> whole{0.0};
        const bool product = L < 5;
        for (std::size_t c = 1; c < boxes.size() && boxes[c].level == 1; ++c) {
            const auto sub = antichain_sums(boxes, w, c, L);
            split += *std::max_element(sub.begin(), sub.end());
            if (!product) continue;
            std::vector<double> next;
            for (double x : whole)
                for (double y : sub) next.push_back(x + y);
            whole = std::move(next);
        }
        if (product) best = std::max(best, *std::max_element(whole.begin(), whole.end()));
        else best = std::max(best, split);
        const double oracle_value = std::pow(best, 1.0 / p);
        const double dp = packing_sup_norm(f, NormParams::jn(p)).value_lower;
        const double err = std::abs(dp - oracle_value) / std::max(1.0, oracle_value);
        if (err > 1e-12) ++bad;
        if (err >= worst) worst = err, worst_trial = t;
    }
    return {bad == 0, fmt("500 trials over n=1 L<=5 and n=2 L<=2, %zu mismatches, max rel diff %.2e (trial %d)", bad, worst,
                          worst_trial)};
}

Outcome maximal_bound() {
    std::size_t bad = 0, pointwise = 0;
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const int n = 1 + t % 2, L = (t / 2) % 6;
        const GridFunction f = oracle::random_function(n, L, trial_seed(8, static_cast<std::uint64_t>(t)));
        const GridFunction M = fractional_maximal(f, 1, 0.0).values;
        for (std::size_t i = 0; i < f.cell_count(); ++i)
            if (M[i] < std::abs(f[i])) ++pointwise;
        const std::vector<double> fv(f.values().begin(), f.values().end()), mv(M.values().begin(), M.values().end());
        for (double p : {2.0, 4.0, 8.0}) {
            const double a = oracle::lp(fv, f.cell_measure(), p), b = oracle::lp(mv, f.cell_measure(), p);
            const double bound = p / (p - 1.0);
            if (b > bound * a * (1.0 + 1e-12)) ++bad;
            if (a > 0.0) worst = std::max(worst, b / (bound * a));
        }
    }
    return {bad == 0 && pointwise == 0,
            fmt("%zu norm violations in 3000, %zu pointwise violations, max ||Mf||_p/(p'||f||_p) = %.6f", bad, pointwise,
                worst)};
}

Outcome extrapolation() {
    const auto r = suite(Suite::jn_extrapolation, 1, 8, 1, 9);
    const double r6 = r.stat("max_ratio_depth6").max, r8 = r.stat("max_ratio_depth8").max;
    return {r.passed(), fmt("K = %.6f at L=6, %.6f at L=8 (%.4f <= 1.05), ratio non-increasing in p, %zu violations", r6,
                            r8, r8 / r6, violations(r))};
}

Outcome sobolev() {
    std::size_t checked = 0, bad = 0;
    double worst = 0.0;
    for (int L = 1; L <= 3; ++L) {
        const auto r = suite(Suite::sobolev_chain, 1, L, 1000, 10);
        bad += violations(r, &checked);
        worst = std::max(worst, r.stat("end_to_end_ratio").max);
    }
    return {bad == 0,
            fmt("%zu violations in %zu checks, max ||M_lambda g||_4/||g||_(4/3) = %.6f <= 4^(1/3)", bad, checked, worst)};
}

Outcome family_machinery() {
    std::size_t cz_bad = 0;
    for (int t = 0; t < 1000; ++t) {
        const int n = 1 + t % 2, L = (t / 2) % 6;
        const GridFunction g = oracle::nonnegative_function(n, L, trial_seed(11, static_cast<std::uint64_t>(t)));
        const CubeFamily fam = cz_family(g, 2.0);
        const auto v = validate(fam.tree(), fam.cubes(), FamilyClass::sparse(1.0));
        if (!std::holds_alternative<CubeFamily>(v)) ++cz_bad;
    }
    // Every subset of D(Q0) for n = 1, L <= 3, classified at orders 1/4, 1/2, 1.
    std::size_t nest_bad = 0, families = 0;
    for (int L = 0; L <= 3; ++L) {
        const auto boxes = oracle::all_boxes(1, L);
        const std::uint64_t count = std::uint64_t{1} << boxes.size();
        for (std::uint64_t mask = 1; mask < count; ++mask) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < boxes.size(); ++i)
                if (mask >> i & 1) members.push_back(i);
            const bool a = oracle::subset_info(boxes, members, 1, 0.25).sparse;
            const bool b = oracle::subset_info(boxes, members, 1, 0.5).sparse;
            const bool c = oracle::subset_info(boxes, members, 1, 1.0).sparse;
            families += a + b;
            if ((a && !b) || (b && !c)) ++nest_bad;
        }
    }
    return {cz_bad == 0 && nest_bad == 0,
            fmt("%zu/1000 CZ families fail sparse(1); %zu nesting violations over %zu fractional families", cz_bad, nest_bad,
                families)};
}

Outcome llogl_correlation() {
    const auto a = suite(Suite::embedding_chain, 1, 2, 200, 12);
    const auto b = suite(Suite::embedding_chain, 1, 3, 200, 12);
    const auto& s2 = a.stat("sjn1_over_llogl");
    const auto& s3 = b.stat("sjn1_over_llogl");
    const double w2 = s2.max / s2.min, w3 = s3.max / s3.min;
    return {w2 <= 20.0 && w3 <= 1.1 * w2,
            fmt("[%.4f, %.4f] at L=2 (C/c = %.4f), [%.4f, %.4f] at L=3 (widening %.4f)", s2.min, s2.max, w2, s3.min,
                s3.max, w3 / w2)};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;  // 0: no stated budget
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "Riesz identity", 1.0, riesz},
        {2, "sparse sup <= 2 ||M(f - med)||_p", 30.0, upper_factor_two},
        {3, "lower constant calibration stable", 0.0, lower_calibrated},
        {4, "|E|-form / |Q|-form comparison", 0.0, form_comparison},
        {5, "embedding chain", 0.0, embedding_chain},
        {6, "fractional sparse refinement", 0.0, fractional},
        {7, "packing DP equals antichain enumeration", 10.0, dp_oracle},
        {8, "maximal function bound", 0.0, maximal_bound},
        {9, "JN extrapolation", 5.0, extrapolation},
        {10, "Sobolev chain", 0.0, sobolev},
        {11, "family machinery", 0.0, family_machinery},
        {12, "SJN_1 / L log L correlation", 0.0, llogl_correlation},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.budget_s == 0.0 || s < c.budget_s;
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("%s  %2d  %s: %s  [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), s,
                    in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
