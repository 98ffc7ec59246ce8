#include "oscnorm/families.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oscnorm/error.hpp"

namespace oscnorm {

FamilyClass FamilyClass::sparse(double order) {
    if (!(order > 0.0 && order <= 1.0)) throw Error("sparse order must lie in (0,1]");
    return {Kind::sparse, order};
}

std::string FamilyClass::tag() const {
    switch (kind) {
        case Kind::packing: return "packing";
        case Kind::weakly_sparse: return "weakly_sparse";
        case Kind::general: return "general";
        case Kind::sparse: break;
    }
    std::ostringstream os;
    os << "sparse(" << order << ")";
    return os.str();
}

namespace {

// Nearest strict ancestor of `node` that is a member, or npos.
std::size_t member_ancestor(const DyadicTree& tree, const std::vector<char>& in, std::size_t node) {
    while (node != 0) {
        node = tree.parent_index(node);
        if (in[node]) return node;
    }
    return static_cast<std::size_t>(-1);
}

std::string describe(const CubeId& c) {
    std::ostringstream os;
    os << "level " << c.level << " coords (" << c.coords[0] << "," << c.coords[1] << ")";
    return os.str();
}

}  // namespace

CubeFamily::CubeFamily(const DyadicTree& tree, std::vector<std::size_t> members, FamilyClass kind)
    : tree_(tree), members_(std::move(members)), kind_(kind) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    for (auto m : members_)
        if (m >= tree_.node_count()) throw Error("family member outside the dyadic tree");

    std::vector<char> in(tree_.node_count(), 0);
    for (auto m : members_) in[m] = 1;
    children_.assign(members_.size(), {});
    for (auto m : members_) {
        const auto anc = member_ancestor(tree_, in, m);
        if (anc == static_cast<std::size_t>(-1)) continue;
        const auto pos = static_cast<std::size_t>(std::lower_bound(members_.begin(), members_.end(), anc) - members_.begin());
        children_[pos].push_back(m);
    }
    core_measure_.resize(members_.size());
    const int n = tree_.dimension();
    for (std::size_t i = 0; i < members_.size(); ++i) {
        double mu = measure(tree_.node(members_[i]), n);
        for (auto ch : children_[i]) mu -= measure(tree_.node(ch), n);
        core_measure_[i] = mu;
    }
}

std::vector<CubeId> CubeFamily::cubes() const {
    std::vector<CubeId> out;
    out.reserve(members_.size());
    for (auto m : members_) out.push_back(tree_.node(m));
    return out;
}

std::vector<std::size_t> CubeFamily::core_cells(std::size_t position) const {
    const int n = tree_.dimension(), depth = tree_.depth();
    auto cells = cells_in(tree_.node(members_[position]), n, depth);
    std::vector<std::size_t> removed;
    for (auto ch : children_[position]) {
        const auto sub = cells_in(tree_.node(ch), n, depth);
        removed.insert(removed.end(), sub.begin(), sub.end());
    }
    std::sort(removed.begin(), removed.end());
    std::vector<std::size_t> out;
    std::set_difference(cells.begin(), cells.end(), removed.begin(), removed.end(), std::back_inserter(out));
    return out;
}

std::uint64_t CubeFamily::mask() const {
    if (tree_.node_count() > 64) throw Error("family mask needs at most 64 tree nodes");
    std::uint64_t m = 0;
    for (auto idx : members_) m |= std::uint64_t{1} << idx;
    return m;
}

CubeFamily family_from_mask(const DyadicTree& tree, std::uint64_t mask, FamilyClass kind) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < tree.node_count() && i < 64; ++i)
        if (mask >> i & 1U) members.push_back(i);
    return CubeFamily(tree, std::move(members), kind);
}

Validation validate(const DyadicTree& tree, const std::vector<std::size_t>& members, FamilyClass requested) {
    CubeFamily fam(tree, members, requested);
    const int n = tree.dimension();
    using Kind = FamilyClass::Kind;
    for (std::size_t i = 0; i < fam.size(); ++i) {
        const CubeId q = fam.cube(i);
        const double mu = measure(q, n);
        switch (requested.kind) {
            case Kind::general: break;
            case Kind::packing:
                if (!fam.children_of(i).empty()) {
                    const CubeId inner = tree.node(fam.children_of(i).front());
                    return Violation{q, 1.0, 0.0, "members " + describe(q) + " and " + describe(inner) + " are nested"};
                }
                break;
            case Kind::sparse: {
                double sum = 0.0;
                for (auto ch : fam.children_of(i)) sum += std::pow(measure(tree.node(ch), n), requested.order);
                const double bound = 0.5 * std::pow(mu, requested.order);
                if (sum > bound + kFamilyTolerance)
                    return Violation{q, sum, bound, "children of " + describe(q) + " exceed half its measure power"};
                break;
            }
            case Kind::weakly_sparse: {
                const double core = fam.core_measure(i);
                if (core < 0.5 * mu - kFamilyTolerance || core > mu + kFamilyTolerance)
                    return Violation{q, core, 0.5 * mu, "core set of " + describe(q) + " is below half its measure"};
                break;
            }
        }
    }
    if (requested.kind == Kind::weakly_sparse) {
        // Core sets must be pairwise disjoint as sets of finest cells.
        std::vector<char> seen(tree.level_size(tree.depth()), 0);
        for (std::size_t i = 0; i < fam.size(); ++i)
            for (auto cell : fam.core_cells(i)) {
                if (seen[cell]) return Violation{fam.cube(i), 0.0, 0.0, "core sets overlap at " + describe(fam.cube(i))};
                seen[cell] = 1;
            }
    }
    return fam;
}

Validation validate(const DyadicTree& tree, const std::vector<CubeId>& cubes, FamilyClass requested) {
    std::vector<std::size_t> members;
    members.reserve(cubes.size());
    for (const auto& c : cubes) members.push_back(tree.index_of(c));
    return validate(tree, members, requested);
}

namespace {

struct Enumerator {
    const DyadicTree& tree;
    FamilyClass cls;
    const std::function<bool(std::uint64_t)>& visit;
    std::vector<std::uint64_t> desc;      // strict descendants
    std::vector<std::uint64_t> ancestors; // strict ancestors
    std::vector<double> powered;          // |Q|^order
    std::vector<double> half_powered;
    bool stopped = false;

    bool admissible(std::size_t node, std::uint64_t mask) const {
        const std::uint64_t inside = mask & desc[node];
        if (cls.kind == FamilyClass::Kind::packing) return inside == 0;
        if (cls.kind == FamilyClass::Kind::general) return true;
        double sum = 0.0;
        for (std::uint64_t rest = inside; rest != 0; rest &= rest - 1) {
            const auto x = static_cast<std::size_t>(__builtin_ctzll(rest));
            if ((mask & ancestors[x] & desc[node]) == 0) sum += powered[x];
        }
        return sum <= half_powered[node] + kFamilyTolerance;
    }

    // Decide nodes from the highest index down; the 0-branch first yields increasing masks.
    void run(std::ptrdiff_t node, std::uint64_t mask) {
        if (stopped) return;
        if (node < 0) {
            if (mask != 0 && !visit(mask)) stopped = true;
            return;
        }
        const auto u = static_cast<std::size_t>(node);
        run(node - 1, mask);
        if (!stopped && admissible(u, mask)) run(node - 1, mask | (std::uint64_t{1} << u));
    }
};

}  // namespace

void for_each_family_mask(const DyadicTree& tree, FamilyClass cls, const std::function<bool(std::uint64_t)>& visit) {
    const std::size_t nodes = tree.node_count();
    const std::size_t cap =
        cls.kind == FamilyClass::Kind::packing ? kMaxAntichainEnumerationNodes : kMaxSubsetEnumerationNodes;
    if (nodes > cap) throw Error("oracle scale exceeded");

    Enumerator e{tree, cls, visit, {}, {}, {}, {}};
    e.desc.assign(nodes, 0);
    e.ancestors.assign(nodes, 0);
    const double order = cls.kind == FamilyClass::Kind::sparse ? cls.order : 1.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        const double mu = measure(tree.node(i), tree.dimension());
        e.powered.push_back(std::pow(mu, order));
        e.half_powered.push_back(0.5 * std::pow(mu, order));
        for (std::size_t a = i; a != 0;) {
            a = tree.parent_index(a);
            e.ancestors[i] |= std::uint64_t{1} << a;
            e.desc[a] |= std::uint64_t{1} << i;
        }
    }
    e.run(static_cast<std::ptrdiff_t>(nodes) - 1, 0);
}

void for_each_family(const DyadicTree& tree, FamilyClass cls, const std::function<bool(const CubeFamily&)>& visit) {
    for_each_family_mask(tree, cls, [&](std::uint64_t mask) { return visit(family_from_mask(tree, mask, cls)); });
}

std::vector<CubeFamily> enumerate_families(int depth, int dimension, FamilyClass cls) {
    const DyadicTree tree(dimension, depth);
    std::vector<CubeFamily> out;
    for_each_family(tree, cls, [&](const CubeFamily& f) {
        out.push_back(f);
        return true;
    });
    return out;
}

CubeFamily cz_family(const GridFunction& g, double factor) {
    if (!(factor > 1.0)) throw Error("stopping-time factor must exceed 1");
    for (double v : g.values())
        if (v < 0.0) throw Error("stopping-time density has negative values");

    const DyadicTree tree(g.dimension(), g.depth());
    const MomentTable table(g, 0);
    std::vector<double> avg(tree.node_count());
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] = table.average(tree.node(i));

    std::vector<std::size_t> selected{0};
    std::vector<std::size_t> queue{0};
    while (!queue.empty()) {
        const std::size_t top = queue.back();
        queue.pop_back();
        const double threshold = factor * avg[top];
        std::vector<std::size_t> stack = tree.child_indices(top);
        while (!stack.empty()) {
            const std::size_t c = stack.back();
            stack.pop_back();
            if (avg[c] > threshold) {
                selected.push_back(c);
                queue.push_back(c);
            } else {
                for (auto ch : tree.child_indices(c)) stack.push_back(ch);
            }
        }
    }
    auto checked = validate(tree, selected, FamilyClass::sparse(1.0));
    if (auto* fam = std::get_if<CubeFamily>(&checked)) return *fam;
    return CubeFamily(tree, selected, FamilyClass::general());
}

}  // namespace oscnorm
