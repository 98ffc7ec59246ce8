#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oscnorm/dyadic_grid.hpp"
#include "oscnorm/families.hpp"
#include "oscnorm/local_poly.hpp"
#include "oscnorm/maximal_ops.hpp"

namespace oscnorm {

/// How the local oscillation of f on a cube is measured.
///  - best_fit: E_k(f;Q)_q, the best polynomial approximation error (Brudnyi scale).
///  - mean: (int_Q |f - f_Q|^q)^(1/q), the literal mean oscillation used by JN_p, SJN_p and BMO.
enum class Oscillation { best_fit, mean };

struct NormParams {
    int k = 1;
    int q = 1;
    double lambda = 0.0;
    double p = 2.0;  // may be +infinity
    ExponentConvention convention = ExponentConvention::SV;
    FamilyClass family_class = FamilyClass::packing();
    Oscillation oscillation = Oscillation::best_fit;

    static NormParams jn(double p);
    static NormParams sjn(double p);
    static NormParams bmo();
    static NormParams riesz(double p);
    static NormParams v(int k, int q, double lambda, double p);
    static NormParams sv(int k, int q, double lambda, double p);
    /// Fractional sparse variant: families sparse of order 1 - lambda/n.
    static NormParams svt(int dimension, int k, int q, double lambda, double p);

    /// Throws on parameter combinations the evaluators do not support.
    void check(int dimension) const;
};

struct NormReport {
    double value_lower = 0.0;
    double value_upper = 0.0;
    bool exact = false;
    CubeFamily witness;
    NormParams params;
    /// Supremum of the |Q|-weighted form (sum s_Q^p |Q|)^(1/p), when it was evaluated.
    std::optional<double> q_weighted;
};

/// Scaled local oscillation s(Q) = |Q|^e osc(f;Q) for every node of D(Q0), in BFS order.
std::vector<double> scaled_local_errors(const MomentTable& table, const NormParams& params);

/// (sum over members of s_Q^p |E_Q|)^(1/p), or with |Q| in place of |E_Q| when `q_weighted`.
double family_value(const std::vector<double>& scaled, const CubeFamily& family, double p, bool q_weighted = false);

/// Recomputes the functional of `family` from scratch; used to audit serialized witnesses.
double evaluate_family(const GridFunction& f, const NormParams& params, const CubeFamily& family,
                       bool q_weighted = false);

/// Exact supremum over dyadic packings by the tree recursion best(Q) = max(w(Q), sum best(child)).
/// Ties keep the shallower cube.
NormReport packing_sup_norm(const GridFunction& f, const NormParams& params);
NormReport packing_sup_norm(const MomentTable& table, const NormParams& params);

/// Exact supremum over every family of params.family_class by enumeration (oracle scale only).
NormReport sparse_sup_exhaustive(const GridFunction& f, const NormParams& params);
/// `scaled` may carry precomputed scaled_local_errors for the same parameters.
NormReport sparse_sup_exhaustive(const MomentTable& table, const NormParams& params,
                                 const std::vector<double>* scaled = nullptr);

/// Per-family check of |E|-form <= |Q|-form <= 2^(1/p) |E|-form over every family of the class.
struct FormComparison {
    std::size_t families = 0;
    std::size_t violations = 0;
    double max_ratio = 0.0;  // largest |Q|-form / |E|-form over families with a nonzero |E|-form
};
FormComparison compare_sparse_forms(const MomentTable& table, const NormParams& params, double tolerance = 1e-10,
                                    const std::vector<double>* scaled = nullptr);

/// Certified interval for the sparse supremum at any scale: the lower end is attained by an explicit
/// admissible family, the upper end is 2 ||M_{q,lambda}(f - P f)||_p.
NormReport sparse_norm_bounds(const GridFunction& f, const NormParams& params);

/// Garsia-Rodemich functional sup_packings sum int_Q |f - f_Q| / (sum |Q|)^(1/p'), p in (1, inf].
/// Solved exactly by a knapsack recursion over the total measure of the packing.
NormReport garo_norm(const GridFunction& f, double p);

/// sup over all dyadic cubes of the mean oscillation, by direct summation.
double bmo_norm(const GridFunction& f);

/// P^k_{Q0} f: zero for k = 0, the midpoint median for k = 1, q = 1, best_fit otherwise.
PolyFit reference_polynomial(const MomentTable& table, int k, int q);

/// Per-cell int |f - P|^q over Q0 in row-major order.
std::vector<double> residual_cells(const GridFunction& f, const PolyFit& P, int q);

/// M_{q,lambda,Q0}(f - P) and its L^p norm.
MaximalResult maximal_of_residual(const GridFunction& f, const PolyFit& P, int q, double lambda);
double maximal_residual_norm(const GridFunction& f, const PolyFit& P, int q, double lambda, double p);

/// Midpoint of the lower and upper medians of the cell values.
double midpoint_median(const GridFunction& f);

}  // namespace oscnorm
