#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace oscnorm {

/// A dyadic subcube of Q0 = [0,1)^n: side 2^-level, lower corner coords * 2^-level.
/// For n = 1 only coords[0] is meaningful and coords[1] stays 0.
struct CubeId {
    int level = 0;
    std::array<std::int64_t, 2> coords{0, 0};

    auto operator<=>(const CubeId&) const = default;
};

inline constexpr CubeId unit_cube{};

/// Multi-index for monomials x^alpha; alpha[1] is 0 when n = 1.
using MultiIndex = std::array<int, 2>;

/// Piecewise-constant function on the finest cells of a dyadic partition of [0,1)^n.
///
/// Cells are stored row-major: for n = 2 the cell with coordinates (i, j) lives at
/// i * 2^depth + j. Every value is the constant value of f on that cell.
class GridFunction {
public:
    GridFunction(int dimension, int depth, std::vector<double> values);

    static GridFunction constant(int dimension, int depth, double value);

    int dimension() const { return dimension_; }
    int depth() const { return depth_; }
    std::int64_t side_cells() const { return std::int64_t{1} << depth_; }
    std::size_t cell_count() const { return values_.size(); }
    double cell_measure() const;

    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Coordinates of a finest cell from its row-major index.
    CubeId cell(std::size_t index) const;
    std::size_t cell_index(const CubeId& finest) const;

    bool operator==(const GridFunction&) const = default;

private:
    int dimension_;
    int depth_;
    std::vector<double> values_;
};

double measure(const CubeId& c, int dimension);
double side(const CubeId& c);

/// True when c is a valid cube of the depth-`depth` tree in `dimension` dimensions.
bool is_valid(const CubeId& c, int dimension, int depth);
void require_valid(const CubeId& c, int dimension, int depth);

/// The 2^n dyadic children of c in row-major order. Throws when c is a finest cell.
std::vector<CubeId> children(const CubeId& c, int dimension, int depth);

CubeId parent(const CubeId& c);

/// True when `inner` is contained in `outer` (including equality).
bool contains(const CubeId& outer, const CubeId& inner);

/// Row-major indices of the finest cells inside c.
std::vector<std::size_t> cells_in(const CubeId& c, int dimension, int depth);

/// Arithmetic mean of the cell values inside c, by direct summation.
double average(const GridFunction& f, const CubeId& c);

/// Breadth-first numbering of D(Q0): level by level, row-major within a level.
class DyadicTree {
public:
    DyadicTree(int dimension, int depth);

    int dimension() const { return dimension_; }
    int depth() const { return depth_; }
    std::size_t node_count() const { return node_count_; }
    std::size_t level_offset(int level) const { return level_offsets_[static_cast<std::size_t>(level)]; }
    std::size_t level_size(int level) const;

    std::size_t index_of(const CubeId& c) const;
    CubeId node(std::size_t index) const;
    int level_of(std::size_t index) const;

    /// Node indices of the children (empty for finest cells).
    std::vector<std::size_t> child_indices(std::size_t index) const;
    std::size_t parent_index(std::size_t index) const;

    bool operator==(const DyadicTree& o) const {
        return dimension_ == o.dimension_ && depth_ == o.depth_;
    }

private:
    int dimension_;
    int depth_;
    std::size_t node_count_;
    std::vector<std::size_t> level_offsets_;
};

/// Per-level aggregates of f over every dyadic cube.
///
/// For each cube Q we keep the local moments int_Q f(x) t^alpha dx, where
/// t = (x - center(Q)) / (side(Q)/2) ranges over [-1,1]^n, for all |alpha| <= max_order,
/// together with int_Q |f| and int_Q f^2. Parents are assembled from their children
/// by a binomial shift, so every level is exactly consistent with the finest one.
class MomentTable {
public:
    explicit MomentTable(GridFunction f, int max_order = 4);

    const GridFunction& function() const { return f_; }
    const DyadicTree& tree() const { return tree_; }
    int max_order() const { return max_order_; }

    double integral(const CubeId& c) const;
    double average(const CubeId& c) const;
    /// int_c |f|^q for q in {1, 2}.
    double abs_power_integral(const CubeId& c, int q) const;
    /// int_c f(x) t^alpha dx in the cube's local coordinates.
    double local_moment(const CubeId& c, const MultiIndex& alpha) const;
    /// int_c f(x) x^alpha dx in global coordinates.
    double moment(const CubeId& c, const MultiIndex& alpha) const;

private:
    std::size_t slot(const MultiIndex& alpha) const;
    std::size_t record_size() const { return monomials_.size() + 2; }
    const double* record(const CubeId& c) const;

    GridFunction f_;
    DyadicTree tree_;
    int max_order_;
    std::vector<MultiIndex> monomials_;
    std::vector<double> data_;  // node-major records
};

/// Multi-indices with |alpha| <= order in graded lexicographic order.
std::vector<MultiIndex> monomial_indices(int dimension, int order);

/// Convenience wrapper building a MomentTable for a single query.
double moment(const GridFunction& f, const CubeId& c, const MultiIndex& alpha);

}  // namespace oscnorm
