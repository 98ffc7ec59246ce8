#pragma once

#include <vector>

#include "oscnorm/dyadic_grid.hpp"

namespace oscnorm {

/// Which scaling exponent multiplies E_k(f;Q)_q:
/// V uses |Q|^(lambda/n - 1/q), SV uses |Q|^(lambda/(n q) - 1/q). They agree for q = 1 or lambda = 0.
enum class ExponentConvention { V, SV };

/// A polynomial of degree <= k-1 fitted to f on one dyadic cube.
struct PolyFit {
    int dimension = 1;
    CubeId cube;
    int degree_bound = 1;  // k
    int q = 1;
    std::vector<MultiIndex> basis;  // |alpha| <= k-1, graded order
    /// Coefficients of P_a(t0) P_b(t1) (Legendre) in the cube's local coordinates t in [-1,1]^n.
    std::vector<double> legendre;
    /// The same polynomial in the global monomial basis x^alpha, aligned with `basis`.
    std::vector<double> coeffs;
    double error = 0.0;             // ||f - m||_{L^q(cube)}
    double near_best_factor = 1.0;  // certified error / E_k(f;cube)_q upper bound
    bool approximate = false;       // the L1 iteration hit its cap

    double evaluate(double x0, double x1 = 0.0) const;
};

/// Best approximation of f on c by polynomials of degree <= k-1 in L^q(c), 1 <= k <= 3, q in {1,2}.
///
/// q = 2 is an exact orthogonal projection; q = 1, k = 1 is the lower median of the cell values;
/// q = 1, k >= 2 runs iteratively reweighted least squares, refines the result on the exact
/// objective and certifies it with a dual lower bound (near_best_factor).
PolyFit best_fit(const MomentTable& table, const CubeId& c, int k, int q);
PolyFit best_fit(const GridFunction& f, const CubeId& c, int k, int q);

/// E_k(f;c)_q. k = 0 means approximation by zero only, i.e. ||f||_{L^q(c)}.
double local_error(const MomentTable& table, const CubeId& c, int k, int q);

double scale_exponent(int dimension, int q, double lambda, ExponentConvention convention);

/// |c|^e E_k(f;c)_q with e chosen by `convention`.
double scaled_error(const MomentTable& table, const CubeId& c, int k, int q, double lambda,
                    ExponentConvention convention);
double scaled_error(const GridFunction& f, const CubeId& c, int k, int q, double lambda,
                    ExponentConvention convention);

/// Exact int_cell |f - m|^q over every finest cell of m.cube, in cells_in() order.
std::vector<double> residual_cell_integrals(const GridFunction& f, const PolyFit& m, int q);

/// ||f - m||_{L^q(m.cube)}, computed cell by cell.
double residual_norm(const GridFunction& f, const PolyFit& m, int q);

/// Constant polynomial `value` on cube c (degree bound 1).
PolyFit constant_fit(int dimension, const CubeId& c, double value, int q);

}  // namespace oscnorm
