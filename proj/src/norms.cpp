#include "oscnorm/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "oscnorm/error.hpp"

namespace oscnorm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite_p(double p) { return std::isfinite(p); }

double root(double sum, double p) { return sum <= 0.0 ? 0.0 : std::pow(sum, 1.0 / p); }

// Mean oscillation int_Q |f - f_Q|^q, raised to 1/q.
double mean_oscillation(const MomentTable& table, const CubeId& c, int q) {
    const GridFunction& f = table.function();
    const double avg = table.average(c);
    const double mu = f.cell_measure();
    double s = 0.0;
    for (auto i : cells_in(c, f.dimension(), f.depth())) {
        const double d = std::abs(f[i] - avg);
        s += (q == 1 ? d : d * d) * mu;
    }
    return q == 1 ? s : std::sqrt(s);
}

}  // namespace

NormParams NormParams::jn(double p) {
    NormParams r;
    r.k = 1, r.q = 1, r.lambda = 0.0, r.p = p;
    r.family_class = FamilyClass::packing();
    r.oscillation = Oscillation::mean;
    return r;
}

NormParams NormParams::sjn(double p) {
    NormParams r = jn(p);
    r.family_class = FamilyClass::sparse(1.0);
    return r;
}

NormParams NormParams::bmo() { return jn(kInf); }

NormParams NormParams::riesz(double p) {
    NormParams r;
    r.k = 0, r.q = 1, r.lambda = 0.0, r.p = p;
    r.family_class = FamilyClass::packing();
    return r;
}

NormParams NormParams::v(int k, int q, double lambda, double p) {
    NormParams r;
    r.k = k, r.q = q, r.lambda = lambda, r.p = p;
    r.convention = ExponentConvention::V;
    r.family_class = FamilyClass::packing();
    return r;
}

NormParams NormParams::sv(int k, int q, double lambda, double p) {
    NormParams r;
    r.k = k, r.q = q, r.lambda = lambda, r.p = p;
    r.convention = ExponentConvention::SV;
    r.family_class = FamilyClass::sparse(1.0);
    return r;
}

NormParams NormParams::svt(int dimension, int k, int q, double lambda, double p) {
    if (!(lambda >= 0.0 && lambda < dimension)) throw Error("lambda must lie in [0, n)");
    NormParams r = sv(k, q, lambda, p);
    r.family_class = FamilyClass::sparse(1.0 - lambda / dimension);
    return r;
}

void NormParams::check(int dimension) const {
    if (k < 0 || k > 3) throw Error("k must lie in [0, 3]");
    if (q != 1 && q != 2) throw Error("error exponent q must be 1 or 2");
    if (!(p >= 1.0)) throw Error("p must be at least 1");
    if (!std::isfinite(lambda)) throw Error("lambda must be finite");
    if (oscillation == Oscillation::mean && k != 1) throw Error("mean oscillation requires k = 1");
    if (dimension != 1 && dimension != 2) throw Error("dimension must be 1 or 2");
}

std::vector<double> scaled_local_errors(const MomentTable& table, const NormParams& params) {
    const GridFunction& f = table.function();
    const int n = f.dimension();
    params.check(n);
    const DyadicTree& tree = table.tree();
    const double e = scale_exponent(n, params.q, params.lambda, params.convention);
    std::vector<double> out(tree.node_count());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const CubeId c = tree.node(i);
        const double osc = params.oscillation == Oscillation::mean ? mean_oscillation(table, c, params.q)
                                                                   : local_error(table, c, params.k, params.q);
        out[i] = osc == 0.0 ? 0.0 : std::pow(measure(c, n), e) * osc;
    }
    return out;
}

double family_value(const std::vector<double>& scaled, const CubeFamily& family, double p, bool q_weighted) {
    const int n = family.tree().dimension();
    if (!finite_p(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < family.size(); ++i)
            if (q_weighted || family.core_measure(i) > 0.0) m = std::max(m, scaled[family.members()[i]]);
        return m;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < family.size(); ++i) {
        const double w = q_weighted ? measure(family.cube(i), n) : family.core_measure(i);
        sum += std::pow(scaled[family.members()[i]], p) * w;
    }
    return root(sum, p);
}

double evaluate_family(const GridFunction& f, const NormParams& params, const CubeFamily& family, bool q_weighted) {
    if (!(family.tree() == DyadicTree(f.dimension(), f.depth()))) throw Error("family and grid use different trees");
    const MomentTable table(f, 4);
    return family_value(scaled_local_errors(table, params), family, params.p, q_weighted);
}

NormReport packing_sup_norm(const GridFunction& f, const NormParams& params) {
    return packing_sup_norm(MomentTable(f, 4), params);
}

NormReport packing_sup_norm(const MomentTable& table, const NormParams& params) {
    const auto s = scaled_local_errors(table, params);
    const DyadicTree& tree = table.tree();
    const int n = tree.dimension();
    NormParams used = params;
    used.family_class = FamilyClass::packing();

    if (!finite_p(params.p)) {
        const auto it = std::max_element(s.begin(), s.end());
        const auto arg = static_cast<std::size_t>(it - s.begin());
        return {*it, *it, true, CubeFamily(tree, {arg}, FamilyClass::packing()), used, std::nullopt};
    }

    const std::size_t N = tree.node_count();
    std::vector<double> best(N);
    std::vector<char> take(N, 0);
    for (std::size_t i = N; i-- > 0;) {
        const double w = std::pow(s[i], params.p) * measure(tree.node(i), n);
        double below = 0.0;
        for (auto ch : tree.child_indices(i)) below += best[ch];
        if (w >= below) {
            best[i] = w;
            take[i] = 1;
        } else {
            best[i] = below;
        }
    }
    std::vector<std::size_t> members;
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
        const auto i = stack.back();
        stack.pop_back();
        if (take[i]) {
            members.push_back(i);
            continue;
        }
        for (auto ch : tree.child_indices(i)) stack.push_back(ch);
    }
    const double value = root(best[0], params.p);
    return {value, value, true, CubeFamily(tree, std::move(members), FamilyClass::packing()), used, std::nullopt};
}

namespace {

struct Catalog {
    std::vector<std::uint64_t> masks;
    std::vector<std::size_t> offsets{0};
    std::vector<std::size_t> nodes;
    std::vector<double> core;
    std::vector<double> full;
};

std::shared_ptr<const Catalog> catalog(const DyadicTree& tree, FamilyClass cls) {
    using Key = std::tuple<int, int, int, double>;
    static std::mutex mutex;
    static std::map<Key, std::shared_ptr<const Catalog>> cache;
    const Key key{tree.dimension(), tree.depth(), static_cast<int>(cls.kind), cls.order};
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto cat = std::make_shared<Catalog>();
    const int n = tree.dimension();
    for_each_family(tree, cls, [&](const CubeFamily& fam) {
        cat->masks.push_back(fam.mask());
        for (std::size_t i = 0; i < fam.size(); ++i) {
            cat->nodes.push_back(fam.members()[i]);
            cat->core.push_back(fam.core_measure(i));
            cat->full.push_back(measure(fam.cube(i), n));
        }
        cat->offsets.push_back(cat->nodes.size());
        return true;
    });
    std::lock_guard lock(mutex);
    return cache.emplace(key, std::move(cat)).first->second;
}

}  // namespace

NormReport sparse_sup_exhaustive(const GridFunction& f, const NormParams& params) {
    return sparse_sup_exhaustive(MomentTable(f, 4), params);
}

NormReport sparse_sup_exhaustive(const MomentTable& table, const NormParams& params, const std::vector<double>* scaled) {
    const DyadicTree& tree = table.tree();
    const std::size_t cap = params.family_class.kind == FamilyClass::Kind::packing ? kMaxAntichainEnumerationNodes
                                                                                   : kMaxSubsetEnumerationNodes;
    if (tree.node_count() > cap) throw Error("oracle scale exceeded; use sparse_norm_bounds");
    const auto s = scaled ? *scaled : scaled_local_errors(table, params);
    const auto cat = catalog(tree, params.family_class);
    const bool fin = finite_p(params.p);
    std::vector<double> sp(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) sp[i] = fin ? std::pow(s[i], params.p) : s[i];

    double best = -1.0, best_q = -1.0;
    std::size_t arg = 0;
    for (std::size_t fam = 0; fam + 1 < cat->offsets.size(); ++fam) {
        double e = 0.0, qf = 0.0;
        for (std::size_t j = cat->offsets[fam]; j < cat->offsets[fam + 1]; ++j) {
            const double v = sp[cat->nodes[j]];
            if (fin) {
                e += v * cat->core[j];
                qf += v * cat->full[j];
            } else {
                if (cat->core[j] > 0.0) e = std::max(e, v);
                qf = std::max(qf, v);
            }
        }
        if (e > best) best = e, arg = fam;
        best_q = std::max(best_q, qf);
    }
    if (cat->masks.empty()) throw Error("no family of the requested class");
    const double value = fin ? root(best, params.p) : best;
    NormReport r{value, value, true, family_from_mask(tree, cat->masks[arg], params.family_class), params,
                 fin ? root(best_q, params.p) : best_q};
    return r;
}

FormComparison compare_sparse_forms(const MomentTable& table, const NormParams& params, double tolerance,
                                    const std::vector<double>* scaled) {
    const DyadicTree& tree = table.tree();
    if (tree.node_count() > kMaxSubsetEnumerationNodes) throw Error("oracle scale exceeded");
    const auto s = scaled ? *scaled : scaled_local_errors(table, params);
    const auto cat = catalog(tree, params.family_class);
    const bool fin = finite_p(params.p);
    const double factor = fin ? std::pow(2.0, 1.0 / params.p) : 1.0;
    FormComparison out;
    for (std::size_t fam = 0; fam + 1 < cat->offsets.size(); ++fam) {
        double e = 0.0, qf = 0.0;
        for (std::size_t j = cat->offsets[fam]; j < cat->offsets[fam + 1]; ++j) {
            const double v = s[cat->nodes[j]];
            if (fin) {
                e += std::pow(v, params.p) * cat->core[j];
                qf += std::pow(v, params.p) * cat->full[j];
            } else {
                if (cat->core[j] > 0.0) e = std::max(e, v);
                qf = std::max(qf, v);
            }
        }
        if (fin) e = root(e, params.p), qf = root(qf, params.p);
        ++out.families;
        const double scale = std::max(1.0, qf);
        if (e > qf + tolerance * scale || qf > factor * e + tolerance * scale) ++out.violations;
        if (e > 0.0) out.max_ratio = std::max(out.max_ratio, qf / e);
    }
    return out;
}

double midpoint_median(const GridFunction& f) {
    std::vector<double> v(f.values().begin(), f.values().end());
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    if (m % 2 == 1) return v[m / 2];
    return 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

PolyFit reference_polynomial(const MomentTable& table, int k, int q) {
    const GridFunction& f = table.function();
    const int n = f.dimension();
    if (k == 0) return constant_fit(n, unit_cube, 0.0, q);
    if (k == 1 && q == 1) {
        PolyFit fit = constant_fit(n, unit_cube, midpoint_median(f), q);
        fit.error = residual_norm(f, fit, 1);
        return fit;
    }
    return best_fit(table, unit_cube, k, q);
}

std::vector<double> residual_cells(const GridFunction& f, const PolyFit& P, int q) {
    if (P.degree_bound <= 1) {
        const double c = P.coeffs.empty() ? 0.0 : P.coeffs[0];
        const double mu = f.cell_measure();
        std::vector<double> out(f.cell_count());
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double d = std::abs(f[i] - c);
            out[i] = (q == 1 ? d : d * d) * mu;
        }
        return out;
    }
    return residual_cell_integrals(f, P, q);
}

MaximalResult maximal_of_residual(const GridFunction& f, const PolyFit& P, int q, double lambda) {
    const auto cells = residual_cells(f, P, q);
    return fractional_maximal_from_cells(f.dimension(), f.depth(), cells, q, lambda);
}

double maximal_residual_norm(const GridFunction& f, const PolyFit& P, int q, double lambda, double p) {
    return lp_norm(maximal_of_residual(f, P, q, lambda).values, p);
}

NormReport sparse_norm_bounds(const GridFunction& f, const NormParams& params) {
    const MomentTable table(f, 4);
    const DyadicTree& tree = table.tree();
    const auto s = scaled_local_errors(table, params);
    const FamilyClass cls = params.family_class;

    std::vector<CubeFamily> candidates;
    NormParams packing = params;
    packing.family_class = FamilyClass::packing();
    candidates.push_back(packing_sup_norm(table, packing).witness);
    candidates.emplace_back(tree, std::vector<std::size_t>{0}, cls);
    std::vector<std::size_t> finest(tree.level_size(tree.depth()));
    for (std::size_t i = 0; i < finest.size(); ++i) finest[i] = tree.level_offset(tree.depth()) + i;
    candidates.emplace_back(tree, finest, cls);

    const PolyFit P = reference_polynomial(table, params.k, params.q);
    const auto cells = residual_cells(f, P, params.q);
    std::vector<double> density(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) density[i] = cells[i] / f.cell_measure();
    const CubeFamily cz = cz_family(GridFunction(f.dimension(), f.depth(), density), 2.0);
    if (std::holds_alternative<CubeFamily>(validate(tree, cz.members(), cls))) candidates.push_back(cz);

    double lower = -1.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double v = family_value(s, candidates[i], params.p, false);
        if (v > lower) lower = v, arg = i;
    }
    const auto M = fractional_maximal_from_cells(f.dimension(), f.depth(), cells, params.q, params.lambda);
    const double upper = std::max(lower, 2.0 * lp_norm(M.values, params.p));
    CubeFamily witness(tree, candidates[arg].members(), cls);
    return {lower, upper, false, witness, params, std::nullopt};
}

NormReport garo_norm(const GridFunction& f, double p) {
    if (!(p > 1.0)) throw Error("GaRo requires p > 1");
    const MomentTable table(f, 0);
    const DyadicTree& tree = table.tree();
    const int n = tree.dimension();
    const std::size_t N = tree.node_count();
    const int L = tree.depth();

    // a[i] = int_Q |f - f_Q|, measured in units of one finest cell.
    std::vector<double> a(N);
    for (std::size_t i = 0; i < N; ++i) a[i] = mean_oscillation(table, tree.node(i), 1);
    auto units = [&](std::size_t i) { return std::size_t{1} << (n * (L - tree.level_of(i))); };

    // dp[i][m]: largest oscillation mass of a packing inside node i covering m finest cells.
    // split[i][c][m]: units handed to child c when merging children in order.
    std::vector<std::vector<double>> dp(N);
    std::vector<std::vector<std::vector<double>>> partial(N);
    std::vector<char> self_at_full(N, 0);
    for (std::size_t i = N; i-- > 0;) {
        const std::size_t U = units(i);
        std::vector<double> cur{0.0};
        for (auto ch : tree.child_indices(i)) {
            const auto& d = dp[ch];
            std::vector<double> next(cur.size() + d.size() - 1, -kInf);
            for (std::size_t x = 0; x < cur.size(); ++x) {
                if (cur[x] == -kInf) continue;
                for (std::size_t y = 0; y < d.size(); ++y)
                    if (d[y] != -kInf) next[x + y] = std::max(next[x + y], cur[x] + d[y]);
            }
            partial[i].push_back(cur);
            cur = std::move(next);
        }
        cur.resize(U + 1, -kInf);
        if (a[i] >= cur[U]) {
            cur[U] = a[i];
            self_at_full[i] = 1;
        }
        dp[i] = std::move(cur);
    }

    const double expo = std::isfinite(p) ? 1.0 - 1.0 / p : 1.0;
    const double cell = f.cell_measure();
    double best = 0.0;
    std::size_t best_m = units(0);
    bool found = false;
    for (std::size_t m = 1; m < dp[0].size(); ++m) {
        if (dp[0][m] == -kInf) continue;
        const double v = dp[0][m] / std::pow(static_cast<double>(m) * cell, expo);
        if (!found || v > best) best = v, best_m = m, found = true;
    }

    std::vector<std::size_t> members;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, best_m}};
    while (!stack.empty()) {
        auto [i, m] = stack.back();
        stack.pop_back();
        if (m == 0) continue;
        if (m == units(i) && self_at_full[i]) {
            members.push_back(i);
            continue;
        }
        const auto ch = tree.child_indices(i);
        double target = dp[i][m];
        for (std::size_t c = ch.size(); c-- > 0;) {
            const auto& prev = partial[i][c];
            const auto& d = dp[ch[c]];
            for (std::size_t y = 0; y < d.size() && y <= m; ++y) {
                const std::size_t x = m - y;
                if (x >= prev.size() || prev[x] == -kInf || d[y] == -kInf) continue;
                if (prev[x] + d[y] == target) {
                    stack.emplace_back(ch[c], y);
                    m = x;
                    target = prev[x];
                    break;
                }
            }
        }
    }
    NormParams used = NormParams::jn(p);
    return {best, best, true, CubeFamily(tree, std::move(members), FamilyClass::packing()), used, std::nullopt};
}

double bmo_norm(const GridFunction& f) {
    const int n = f.dimension(), L = f.depth();
    double best = 0.0;
    for (int level = 0; level <= L; ++level) {
        const std::int64_t side_count = std::int64_t{1} << level;
        const std::int64_t second = n == 2 ? side_count : 1;
        for (std::int64_t i = 0; i < side_count; ++i)
            for (std::int64_t j = 0; j < second; ++j) {
                const CubeId c{level, {i, n == 2 ? j : 0}};
                const auto cells = cells_in(c, n, L);
                double avg = 0.0;
                for (auto x : cells) avg += f[x];
                avg /= static_cast<double>(cells.size());
                double osc = 0.0;
                for (auto x : cells) osc += std::abs(f[x] - avg);
                best = std::max(best, osc / static_cast<double>(cells.size()));
            }
    }
    return best;
}

}  // namespace oscnorm
