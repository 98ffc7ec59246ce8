#include "oscnorm/dyadic_grid.hpp"

#include <cmath>
#include <string>

#include "oscnorm/error.hpp"

namespace oscnorm {

namespace {

constexpr int kMaxCellBits = 24;

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// (1/2) int_{-1}^{1} t^j dt
double unit_power_mean(int j) { return (j % 2 == 0) ? 1.0 / (j + 1) : 0.0; }

}  // namespace

GridFunction::GridFunction(int dimension, int depth, std::vector<double> values)
    : dimension_(dimension), depth_(depth), values_(std::move(values)) {
    if (dimension_ != 1 && dimension_ != 2)
        throw Error("dimension must be 1 or 2, got " + std::to_string(dimension_));
    if (depth_ < 0 || dimension_ * depth_ > kMaxCellBits)
        throw Error("depth " + std::to_string(depth_) + " out of range for dimension " +
                    std::to_string(dimension_));
    const std::size_t expected = std::size_t{1} << (dimension_ * depth_);
    if (values_.size() != expected)
        throw Error("values length " + std::to_string(values_.size()) + " does not match 2^(n*L) = " +
                    std::to_string(expected));
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!std::isfinite(values_[i]))
            throw Error("value at cell " + std::to_string(i) + " is not finite");
}

GridFunction GridFunction::constant(int dimension, int depth, double value) {
    const int bits = dimension * depth;
    if (bits < 0 || bits > kMaxCellBits) throw Error("depth out of range");
    return GridFunction(dimension, depth, std::vector<double>(std::size_t{1} << bits, value));
}

double GridFunction::cell_measure() const { return std::ldexp(1.0, -dimension_ * depth_); }

CubeId GridFunction::cell(std::size_t index) const {
    CubeId c;
    c.level = depth_;
    if (dimension_ == 1) {
        c.coords[0] = static_cast<std::int64_t>(index);
    } else {
        c.coords[0] = static_cast<std::int64_t>(index) / side_cells();
        c.coords[1] = static_cast<std::int64_t>(index) % side_cells();
    }
    return c;
}

std::size_t GridFunction::cell_index(const CubeId& finest) const {
    if (dimension_ == 1) return static_cast<std::size_t>(finest.coords[0]);
    return static_cast<std::size_t>(finest.coords[0] * side_cells() + finest.coords[1]);
}

double measure(const CubeId& c, int dimension) { return std::ldexp(1.0, -dimension * c.level); }

double side(const CubeId& c) { return std::ldexp(1.0, -c.level); }

bool is_valid(const CubeId& c, int dimension, int depth) {
    if (c.level < 0 || c.level > depth) return false;
    const std::int64_t n_side = std::int64_t{1} << c.level;
    for (int d = 0; d < 2; ++d) {
        if (d >= dimension) {
            if (c.coords[d] != 0) return false;
        } else if (c.coords[d] < 0 || c.coords[d] >= n_side) {
            return false;
        }
    }
    return true;
}

void require_valid(const CubeId& c, int dimension, int depth) {
    if (!is_valid(c, dimension, depth))
        throw Error("cube (level " + std::to_string(c.level) + ") is not valid for depth " +
                    std::to_string(depth));
}

std::vector<CubeId> children(const CubeId& c, int dimension, int depth) {
    require_valid(c, dimension, depth);
    if (c.level >= depth) throw Error("finest level has no children");
    std::vector<CubeId> out;
    if (dimension == 1) {
        for (int i = 0; i < 2; ++i) out.push_back({c.level + 1, {2 * c.coords[0] + i, 0}});
    } else {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                out.push_back({c.level + 1, {2 * c.coords[0] + i, 2 * c.coords[1] + j}});
    }
    return out;
}

CubeId parent(const CubeId& c) {
    if (c.level == 0) throw Error("Q0 has no parent");
    return {c.level - 1, {c.coords[0] >> 1, c.coords[1] >> 1}};
}

bool contains(const CubeId& outer, const CubeId& inner) {
    if (inner.level < outer.level) return false;
    const int shift = inner.level - outer.level;
    return (inner.coords[0] >> shift) == outer.coords[0] && (inner.coords[1] >> shift) == outer.coords[1];
}

std::vector<std::size_t> cells_in(const CubeId& c, int dimension, int depth) {
    require_valid(c, dimension, depth);
    const int shift = depth - c.level;
    const std::int64_t span = std::int64_t{1} << shift;
    const std::int64_t n_side = std::int64_t{1} << depth;
    std::vector<std::size_t> out;
    if (dimension == 1) {
        out.reserve(static_cast<std::size_t>(span));
        for (std::int64_t i = 0; i < span; ++i) out.push_back(static_cast<std::size_t>(c.coords[0] * span + i));
    } else {
        out.reserve(static_cast<std::size_t>(span * span));
        for (std::int64_t i = 0; i < span; ++i)
            for (std::int64_t j = 0; j < span; ++j)
                out.push_back(static_cast<std::size_t>((c.coords[0] * span + i) * n_side + c.coords[1] * span + j));
    }
    return out;
}

double average(const GridFunction& f, const CubeId& c) {
    const auto cells = cells_in(c, f.dimension(), f.depth());
    double sum = 0.0;
    for (auto i : cells) sum += f[i];
    return sum / static_cast<double>(cells.size());
}

// DyadicTree ------------------------------------------------------------------

DyadicTree::DyadicTree(int dimension, int depth) : dimension_(dimension), depth_(depth) {
    if (dimension != 1 && dimension != 2) throw Error("dimension must be 1 or 2");
    if (depth < 0 || dimension * depth > kMaxCellBits) throw Error("depth out of range");
    std::size_t offset = 0;
    for (int l = 0; l <= depth; ++l) {
        level_offsets_.push_back(offset);
        offset += std::size_t{1} << (dimension * l);
    }
    node_count_ = offset;
    level_offsets_.push_back(offset);
}

std::size_t DyadicTree::level_size(int level) const { return std::size_t{1} << (dimension_ * level); }

std::size_t DyadicTree::index_of(const CubeId& c) const {
    require_valid(c, dimension_, depth_);
    std::size_t within = static_cast<std::size_t>(c.coords[0]);
    if (dimension_ == 2) within = within * (std::size_t{1} << c.level) + static_cast<std::size_t>(c.coords[1]);
    return level_offset(c.level) + within;
}

int DyadicTree::level_of(std::size_t index) const {
    int l = 0;
    while (level_offsets_[static_cast<std::size_t>(l) + 1] <= index) ++l;
    return l;
}

CubeId DyadicTree::node(std::size_t index) const {
    if (index >= node_count_) throw Error("node index out of range");
    CubeId c;
    c.level = level_of(index);
    const std::size_t within = index - level_offset(c.level);
    if (dimension_ == 1) {
        c.coords[0] = static_cast<std::int64_t>(within);
    } else {
        const std::size_t s = std::size_t{1} << c.level;
        c.coords[0] = static_cast<std::int64_t>(within / s);
        c.coords[1] = static_cast<std::int64_t>(within % s);
    }
    return c;
}

std::vector<std::size_t> DyadicTree::child_indices(std::size_t index) const {
    const CubeId c = node(index);
    if (c.level == depth_) return {};
    std::vector<std::size_t> out;
    for (const auto& ch : children(c, dimension_, depth_)) out.push_back(index_of(ch));
    return out;
}

std::size_t DyadicTree::parent_index(std::size_t index) const { return index_of(parent(node(index))); }

// MomentTable -------------------------------------------------------------------

std::vector<MultiIndex> monomial_indices(int dimension, int order) {
    std::vector<MultiIndex> out;
    for (int total = 0; total <= order; ++total) {
        if (dimension == 1) {
            out.push_back({total, 0});
        } else {
            for (int a = total; a >= 0; --a) out.push_back({a, total - a});
        }
    }
    return out;
}

MomentTable::MomentTable(GridFunction f, int max_order)
    : f_(std::move(f)), tree_(f_.dimension(), f_.depth()), max_order_(max_order) {
    if (max_order_ < 0) throw Error("moment order must be non-negative");
    const int n = f_.dimension();
    const int depth = f_.depth();
    monomials_ = monomial_indices(n, max_order_);
    const std::size_t rs = record_size();
    const std::size_t nm = monomials_.size();
    data_.assign(tree_.node_count() * rs, 0.0);

    const double cell_mu = f_.cell_measure();
    const std::size_t finest = tree_.level_offset(depth);
    for (std::size_t i = 0; i < f_.cell_count(); ++i) {
        double* r = &data_[(finest + i) * rs];
        const double v = f_[i];
        for (std::size_t m = 0; m < nm; ++m) {
            const auto& a = monomials_[m];
            r[m] = v * cell_mu * unit_power_mean(a[0]) * (n == 2 ? unit_power_mean(a[1]) : 1.0);
        }
        r[nm] = std::abs(v) * cell_mu;
        r[nm + 1] = v * v * cell_mu;
    }

    // Shift coefficients: t_parent = s + t_child / 2 with s = -1/2 or +1/2.
    for (int level = depth - 1; level >= 0; --level) {
        for (std::size_t idx = tree_.level_offset(level); idx < tree_.level_offset(level + 1); ++idx) {
            double* r = &data_[idx * rs];
            const CubeId me = tree_.node(idx);
            for (const auto& ch : children(me, n, depth)) {
                const double* cr = &data_[tree_.index_of(ch) * rs];
                const double s0 = (ch.coords[0] & 1) ? 0.5 : -0.5;
                const double s1 = (ch.coords[1] & 1) ? 0.5 : -0.5;
                for (std::size_t m = 0; m < nm; ++m) {
                    const auto& a = monomials_[m];
                    double acc = 0.0;
                    for (int b0 = 0; b0 <= a[0]; ++b0) {
                        const double w0 = binomial(a[0], b0) * std::pow(s0, a[0] - b0) * std::ldexp(1.0, -b0);
                        for (int b1 = 0; b1 <= a[1]; ++b1) {
                            const double w1 =
                                binomial(a[1], b1) * std::pow(s1, a[1] - b1) * std::ldexp(1.0, -b1);
                            acc += w0 * w1 * cr[slot({b0, b1})];
                        }
                    }
                    r[m] += acc;
                }
                r[nm] += cr[nm];
                r[nm + 1] += cr[nm + 1];
            }
        }
    }
}

std::size_t MomentTable::slot(const MultiIndex& alpha) const {
    const int total = alpha[0] + alpha[1];
    if (total > max_order_) throw Error("moment order exceeds table");
    if (f_.dimension() == 1) return static_cast<std::size_t>(total);
    // graded block for `total` starts at total*(total+1)/2 and lists a = total..0
    return static_cast<std::size_t>(total * (total + 1) / 2 + (total - alpha[0]));
}

const double* MomentTable::record(const CubeId& c) const { return &data_[tree_.index_of(c) * record_size()]; }

double MomentTable::integral(const CubeId& c) const { return record(c)[0]; }

double MomentTable::average(const CubeId& c) const { return integral(c) / measure(c, f_.dimension()); }

double MomentTable::abs_power_integral(const CubeId& c, int q) const {
    if (q == 1) return record(c)[monomials_.size()];
    if (q == 2) return record(c)[monomials_.size() + 1];
    throw Error("abs_power_integral supports q in {1,2}");
}

double MomentTable::local_moment(const CubeId& c, const MultiIndex& alpha) const {
    if (alpha[0] < 0 || alpha[1] < 0 || (f_.dimension() == 1 && alpha[1] != 0))
        throw Error("invalid multi-index");
    return record(c)[slot(alpha)];
}

double MomentTable::moment(const CubeId& c, const MultiIndex& alpha) const {
    if (alpha[0] < 0 || alpha[1] < 0 || (f_.dimension() == 1 && alpha[1] != 0))
        throw Error("invalid multi-index");
    if (alpha[0] + alpha[1] > max_order_) throw Error("moment order exceeds table");
    const double h = side(c) / 2.0;
    const double c0 = (static_cast<double>(c.coords[0]) + 0.5) * side(c);
    const double c1 = (static_cast<double>(c.coords[1]) + 0.5) * side(c);
    const double* r = record(c);
    double acc = 0.0;
    for (int b0 = 0; b0 <= alpha[0]; ++b0) {
        const double w0 = binomial(alpha[0], b0) * std::pow(c0, alpha[0] - b0) * std::pow(h, b0);
        for (int b1 = 0; b1 <= alpha[1]; ++b1) {
            const double w1 = binomial(alpha[1], b1) * std::pow(c1, alpha[1] - b1) * std::pow(h, b1);
            acc += w0 * w1 * r[slot({b0, b1})];
        }
    }
    return acc;
}

double moment(const GridFunction& f, const CubeId& c, const MultiIndex& alpha) {
    const int order = alpha[0] + alpha[1];
    if (order > 4) throw Error("moment order exceeds table");
    return MomentTable(f, 4).moment(c, alpha);
}

}  // namespace oscnorm
