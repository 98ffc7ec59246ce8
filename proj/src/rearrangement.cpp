#include "oscnorm/rearrangement.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "oscnorm/error.hpp"

namespace oscnorm {

Rearrangement::Rearrangement(const GridFunction& f) : block_(f.cell_measure()) {
    sorted_.reserve(f.cell_count());
    for (double v : f.values()) sorted_.push_back(std::abs(v));
    std::sort(sorted_.begin(), sorted_.end(), std::greater<>());
    prefix_.assign(sorted_.size() + 1, 0.0);
    for (std::size_t j = 0; j < sorted_.size(); ++j) prefix_[j + 1] = prefix_[j] + sorted_[j] * block_;
}

double Rearrangement::star(double t) const {
    if (t < 0.0) throw Error("rearrangement argument must be nonnegative");
    const auto j = static_cast<std::size_t>(std::floor(t / block_ + 1e-12));
    return j < sorted_.size() ? sorted_[j] : 0.0;
}

double Rearrangement::star_left(double t) const {
    if (!(t > 0.0)) throw Error("left limit needs t > 0");
    const auto j = static_cast<std::size_t>(std::ceil(t / block_ - 1e-12));
    return j >= 1 && j - 1 < sorted_.size() ? sorted_[j - 1] : 0.0;
}

double Rearrangement::double_star(double t) const {
    if (!(t > 0.0)) throw Error("f** needs t > 0");
    const double u = t / block_;
    auto j = static_cast<std::size_t>(std::floor(u));
    if (j >= sorted_.size()) return prefix_.back() / t;
    return (prefix_[j] + (u - static_cast<double>(j)) * block_ * sorted_[j]) / t;
}

double weak_lp_norm(const GridFunction& f, double p) {
    if (!(p > 1.0)) throw Error("weak L^p requires p > 1");
    const Rearrangement r(f);
    const auto& b = r.blocks();
    double best = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
        const double t = static_cast<double>(j + 1) * r.block();
        best = std::max(best, (std::isfinite(p) ? std::pow(t, 1.0 / p) : 1.0) * b[j]);
    }
    return best;
}

double llogl_norm(const GridFunction& f) {
    const double mu = f.cell_measure();
    double sup = 0.0, l1 = 0.0;
    for (double v : f.values()) sup = std::max(sup, std::abs(v)), l1 += std::abs(v) * mu;
    if (sup == 0.0) return 0.0;
    auto modular = [&](double m) {
        double s = 0.0;
        for (double v : f.values()) {
            const double t = std::abs(v) / m;
            s += t * std::log(std::numbers::e + t) * mu;
        }
        return s;
    };
    double lo = 0.0;
    double hi = std::max(sup, l1 * std::log(std::numbers::e + 1.0));
    while (modular(hi) > 1.0) hi *= 2.0;
    while (hi - lo > 1e-10 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (modular(mid) > 1.0) lo = mid;
        else hi = mid;
    }
    return hi;
}

double bds_functional(const GridFunction& f) {
    const Rearrangement r(f);
    const std::size_t m = r.blocks().size();
    double best = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double left = static_cast<double>(j) * r.block();
        const double mid = left + 0.5 * r.block();
        // Within a block f* is flat and f** decreases, so the left endpoint dominates.
        if (j > 0) best = std::max(best, r.double_star(left) - r.star(left));
        best = std::max(best, r.double_star(mid) - r.star(mid));
    }
    best = std::max(best, r.double_star(1.0) - r.star_left(1.0));
    return best;
}

RiFunctionals ri_functionals(const GridFunction& f, double p) {
    return {weak_lp_norm(f, p), llogl_norm(f), bds_functional(f)};
}

}  // namespace oscnorm
