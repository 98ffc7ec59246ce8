#pragma once

#include <span>

#include "oscnorm/dyadic_grid.hpp"

namespace oscnorm {

/// Pointwise values of M_{q,lambda,Q0} f, constant on finest cells.
struct MaximalResult {
    GridFunction values;
    int q = 1;
    double lambda = 0.0;
};

/// Dyadic local fractional maximal function
///   M f(x) = sup_{Q in D(Q0), Q contains x} ( |Q|^(lambda/n - 1) int_Q |f|^q )^(1/q).
/// The cubes containing a cell form its ancestor chain, so the supremum is a running
/// maximum propagated from Q0 down to the finest level.
MaximalResult fractional_maximal(const GridFunction& f, int q, double lambda);

/// Same operator when f is not piecewise constant: `cell_integrals[i]` is int_cell_i |g|^q
/// for the row-major finest cells of a depth-`depth` grid.
MaximalResult fractional_maximal_from_cells(int dimension, int depth, std::span<const double> cell_integrals,
                                            int q, double lambda);

/// ||g||_{L^p(Q0)}; p = infinity gives max |g|.
double lp_norm(const GridFunction& g, double p);

/// p / (p - 1): the interpolation bound for the dyadic maximal operator on L^p.
double maximal_opnorm_bound(double p);

}  // namespace oscnorm
