#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "oscnorm/dyadic_grid.hpp"
#include "oscnorm/generators.hpp"

namespace oracle {

using oscnorm::CubeId;
using oscnorm::GridFunction;

struct Box {
    int level;
    std::int64_t i, j;
};

// All dyadic cubes, coarse to fine, row-major within a level.
inline std::vector<Box> all_boxes(int n, int L) {
    std::vector<Box> out;
    for (int l = 0; l <= L; ++l)
        for (std::int64_t i = 0; i < (std::int64_t{1} << l); ++i)
            for (std::int64_t j = 0; j < (n == 2 ? (std::int64_t{1} << l) : 1); ++j) out.push_back({l, i, j});
    return out;
}

inline std::vector<std::size_t> cells_of(const Box& b, int n, int L) {
    const std::int64_t span = std::int64_t{1} << (L - b.level), side = std::int64_t{1} << L;
    std::vector<std::size_t> out;
    for (std::int64_t a = b.i * span; a < (b.i + 1) * span; ++a) {
        if (n == 1) {
            out.push_back(static_cast<std::size_t>(a));
            continue;
        }
        for (std::int64_t c = b.j * span; c < (b.j + 1) * span; ++c) out.push_back(static_cast<std::size_t>(a * side + c));
    }
    return out;
}

inline double box_measure(const Box& b, int n) { return std::pow(0.5, n * b.level); }

inline bool inside(const Box& inner, const Box& outer) {
    if (inner.level < outer.level) return false;
    const int d = inner.level - outer.level;
    return (inner.i >> d) == outer.i && (inner.j >> d) == outer.j;
}

inline double mean_over(const GridFunction& f, const Box& b) {
    double s = 0.0;
    const auto cells = cells_of(b, f.dimension(), f.depth());
    for (auto c : cells) s += f[c];
    return s / static_cast<double>(cells.size());
}

// int_Q |f - f_Q|.
inline double mean_osc_mass(const GridFunction& f, const Box& b) {
    const double m = mean_over(f, b);
    double s = 0.0;
    for (auto c : cells_of(b, f.dimension(), f.depth())) s += std::abs(f[c] - m) * f.cell_measure();
    return s;
}

// min over candidate constants (the cell values) of int_Q |f - c|.
inline double median_error(const GridFunction& f, const Box& b) {
    const auto cells = cells_of(b, f.dimension(), f.depth());
    double best = std::numeric_limits<double>::infinity();
    for (auto c0 : cells) {
        double s = 0.0;
        for (auto c : cells) s += std::abs(f[c] - f[c0]) * f.cell_measure();
        best = std::min(best, s);
    }
    return best;
}

// Every antichain of the dyadic tree, as index lists into all_boxes().
inline void antichains(const std::vector<Box>& boxes, int L, const std::function<void(const std::vector<std::size_t>&)>& visit) {
    // Recursive product: antichains below b are {b} or combinations over its children (possibly empty).
    std::function<std::vector<std::vector<std::size_t>>(std::size_t)> below = [&](std::size_t idx) {
        const Box& b = boxes[idx];
        if (b.level == L) return std::vector<std::vector<std::size_t>>{{}, {idx}};
        std::vector<std::vector<std::size_t>> combos{{}};
        for (std::size_t k = 0; k < boxes.size(); ++k) {
            const Box& c = boxes[k];
            if (c.level != b.level + 1 || !inside(c, b)) continue;
            auto sub = below(k);
            std::vector<std::vector<std::size_t>> next;
            for (const auto& x : combos)
                for (const auto& y : sub) {
                    auto z = x;
                    z.insert(z.end(), y.begin(), y.end());
                    next.push_back(std::move(z));
                }
            combos = std::move(next);
        }
        combos.push_back({idx});
        return combos;
    };
    for (const auto& a : below(0))
        if (!a.empty()) visit(a);
}

// Core sets and the sparse(order) test for a subset of boxes, by cell bookkeeping.
struct SubsetInfo {
    bool sparse = true;
    std::vector<double> core;  // |E_Q| per member
};

inline SubsetInfo subset_info(const std::vector<Box>& boxes, const std::vector<std::size_t>& members, int n, double order) {
    SubsetInfo info;
    for (auto a : members) {
        std::vector<std::size_t> kids;
        for (auto b : members) {
            if (a == b || !inside(boxes[b], boxes[a])) continue;
            bool maximal = true;
            for (auto m : members)
                if (m != a && m != b && inside(boxes[b], boxes[m]) && inside(boxes[m], boxes[a])) maximal = false;
            if (maximal) kids.push_back(b);
        }
        double sum = 0.0, removed = 0.0;
        for (auto b : kids) sum += std::pow(box_measure(boxes[b], n), order), removed += box_measure(boxes[b], n);
        if (sum > 0.5 * std::pow(box_measure(boxes[a], n), order) + 1e-12) info.sparse = false;
        info.core.push_back(box_measure(boxes[a], n) - removed);
    }
    return info;
}

inline GridFunction random_function(int n, int L, std::uint64_t seed) {
    oscnorm::SplitMix64 rng(seed);
    return oscnorm::random_grid(n, L, rng);
}

inline GridFunction nonnegative_function(int n, int L, std::uint64_t seed) {
    oscnorm::SplitMix64 rng(seed);
    std::vector<double> v(std::size_t{1} << (n * L));
    for (auto& x : v) {
        const double u = rng.uniform();
        x = u < 0.3 ? 0.0 : std::pow(u, 4.0) * 10.0;
    }
    return GridFunction(n, L, std::move(v));
}

inline double lp(const std::vector<double>& v, double cell, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    double s = 0.0;
    for (double x : v) s += std::pow(std::abs(x), p) * cell;
    return std::pow(s, 1.0 / p);
}

}  // namespace oracle
