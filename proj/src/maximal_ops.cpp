#include "oscnorm/maximal_ops.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "oscnorm/error.hpp"

namespace oscnorm {

MaximalResult fractional_maximal_from_cells(int dimension, int depth, std::span<const double> cell_integrals,
                                            int q, double lambda) {
    if (q != 1 && q != 2) throw Error("maximal exponent q must be 1 or 2, got " + std::to_string(q));
    if (!(lambda >= 0.0 && lambda < dimension))
        throw Error("fractional order lambda must lie in [0, n), got " + std::to_string(lambda));
    const DyadicTree tree(dimension, depth);
    const std::size_t cells = tree.level_size(depth);
    if (cell_integrals.size() != cells) throw Error("cell integral count does not match the grid");

    // Integrals per node, finest level first.
    std::vector<double> mass(tree.node_count(), 0.0);
    const std::size_t finest = tree.level_offset(depth);
    for (std::size_t i = 0; i < cells; ++i) mass[finest + i] = cell_integrals[i];
    for (int level = depth - 1; level >= 0; --level)
        for (std::size_t idx = tree.level_offset(level); idx < tree.level_offset(level + 1); ++idx)
            for (auto ch : tree.child_indices(idx)) mass[idx] += mass[ch];

    // Running maximum of |Q|^(lambda/n - 1) int_Q |f|^q down the tree.
    std::vector<double> best(tree.node_count(), 0.0);
    for (int level = 0; level <= depth; ++level) {
        const double mu = std::ldexp(1.0, -dimension * level);
        const double weight = std::pow(mu, lambda / dimension - 1.0);
        for (std::size_t idx = tree.level_offset(level); idx < tree.level_offset(level + 1); ++idx) {
            const double here = weight * mass[idx];
            best[idx] = level == 0 ? here : std::max(here, best[tree.parent_index(idx)]);
        }
    }
    std::vector<double> values(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        const double v = std::max(best[finest + i], 0.0);
        values[i] = q == 1 ? v : std::sqrt(v);
    }
    return {GridFunction(dimension, depth, std::move(values)), q, lambda};
}

MaximalResult fractional_maximal(const GridFunction& f, int q, double lambda) {
    std::vector<double> cell(f.cell_count());
    const double mu = f.cell_measure();
    for (std::size_t i = 0; i < cell.size(); ++i) cell[i] = std::pow(std::abs(f[i]), q) * mu;
    return fractional_maximal_from_cells(f.dimension(), f.depth(), cell, q, lambda);
}

double lp_norm(const GridFunction& g, double p) {
    if (!(p >= 1.0)) throw Error("L^p exponent must be >= 1, got " + std::to_string(p));
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : g.values()) m = std::max(m, std::abs(v));
        return m;
    }
    double acc = 0.0;
    for (double v : g.values()) acc += std::pow(std::abs(v), p);
    return std::pow(acc * g.cell_measure(), 1.0 / p);
}

double maximal_opnorm_bound(double p) {
    if (!(p > 1.0) || std::isinf(p)) throw Error("maximal bound needs 1 < p < infinity, got " + std::to_string(p));
    return p / (p - 1.0);
}

}  // namespace oscnorm
