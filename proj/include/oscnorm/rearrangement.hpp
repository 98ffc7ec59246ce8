#pragma once

#include <vector>

#include "oscnorm/dyadic_grid.hpp"

namespace oscnorm {

/// Decreasing rearrangement f* of |f| as a step function on blocks of one cell measure,
/// together with its running average f**(t) = (1/t) int_0^t f*.
class Rearrangement {
public:
    explicit Rearrangement(const GridFunction& f);

    double block() const { return block_; }
    /// |f| cell values sorted decreasing.
    const std::vector<double>& blocks() const { return sorted_; }

    /// f*(t), right-continuous; zero for t >= 1.
    double star(double t) const;
    /// Left limit f*(t-), t > 0.
    double star_left(double t) const;
    /// f**(t) for t > 0.
    double double_star(double t) const;

private:
    double block_;
    std::vector<double> sorted_;
    std::vector<double> prefix_;  // prefix_[j] = int_0^{j block} f*
};

struct RiFunctionals {
    double weak_lp = 0.0;
    double llogl = 0.0;
    double bds = 0.0;
};

/// sup_t t^(1/p) f*(t), p > 1.
double weak_lp_norm(const GridFunction& f, double p);
/// Luxemburg norm of f for Phi(t) = t log(e + t).
double llogl_norm(const GridFunction& f);
/// sup_t f**(t) - f*(t).
double bds_functional(const GridFunction& f);

RiFunctionals ri_functionals(const GridFunction& f, double p);

}  // namespace oscnorm
