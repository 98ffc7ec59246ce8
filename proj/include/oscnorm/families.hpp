#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "oscnorm/dyadic_grid.hpp"

namespace oscnorm {

/// Admissibility class of a cube family.
struct FamilyClass {
    enum class Kind { packing, sparse, weakly_sparse, general };

    Kind kind = Kind::sparse;
    double order = 1.0;  // lambda' in (0,1], meaningful for Kind::sparse

    static FamilyClass packing() { return {Kind::packing, 1.0}; }
    static FamilyClass sparse(double order = 1.0);
    static FamilyClass weakly_sparse() { return {Kind::weakly_sparse, 1.0}; }
    static FamilyClass general() { return {Kind::general, 1.0}; }

    std::string tag() const;
    bool operator==(const FamilyClass&) const = default;
};

/// A finite set of dyadic cubes together with its inclusion structure.
///
/// Members are kept as breadth-first node indices of the tree, sorted. For each member Q,
/// Ch(Q) lists the maximal members strictly inside Q and E_Q = Q minus the union of Ch(Q).
class CubeFamily {
public:
    CubeFamily(const DyadicTree& tree, std::vector<std::size_t> members, FamilyClass kind);

    const DyadicTree& tree() const { return tree_; }
    FamilyClass kind() const { return kind_; }
    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }

    const std::vector<std::size_t>& members() const { return members_; }
    std::vector<CubeId> cubes() const;
    CubeId cube(std::size_t position) const { return tree_.node(members_[position]); }

    /// Node indices of Ch(Q) for the member at `position`.
    const std::vector<std::size_t>& children_of(std::size_t position) const { return children_[position]; }
    /// |E_Q| for the member at `position`.
    double core_measure(std::size_t position) const { return core_measure_[position]; }
    /// Row-major finest cells making up E_Q.
    std::vector<std::size_t> core_cells(std::size_t position) const;

    /// Membership bitmask over node indices (requires node_count <= 64).
    std::uint64_t mask() const;

private:
    DyadicTree tree_;
    std::vector<std::size_t> members_;
    FamilyClass kind_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<double> core_measure_;
};

/// First cube at which a requested class condition fails.
struct Violation {
    CubeId cube;
    double lhs = 0.0;  // children sum that was compared
    double rhs = 0.0;  // bound it exceeded
    std::string message;
};

using Validation = std::variant<CubeFamily, Violation>;

/// Comparison slack for lambda'-powers of dyadic measures.
inline constexpr double kFamilyTolerance = 1e-12;

/// Builds Ch(Q) and E_Q and checks `requested`; violations are reported, not thrown.
Validation validate(const DyadicTree& tree, const std::vector<CubeId>& cubes, FamilyClass requested);
Validation validate(const DyadicTree& tree, const std::vector<std::size_t>& members, FamilyClass requested);

/// Builds the family from a membership mask without checking any class condition.
CubeFamily family_from_mask(const DyadicTree& tree, std::uint64_t mask, FamilyClass kind);

/// Largest node counts accepted by the exhaustive enumerators.
inline constexpr std::size_t kMaxSubsetEnumerationNodes = 15;
inline constexpr std::size_t kMaxAntichainEnumerationNodes = 63;

/// Streams every nonempty family of `cls` over D(Q0) as a membership mask, in increasing
/// mask order. The callback returns false to stop early.
void for_each_family_mask(const DyadicTree& tree, FamilyClass cls, const std::function<bool(std::uint64_t)>& visit);
void for_each_family(const DyadicTree& tree, FamilyClass cls, const std::function<bool(const CubeFamily&)>& visit);
std::vector<CubeFamily> enumerate_families(int depth, int dimension, FamilyClass cls);

/// Calderon-Zygmund stopping time for a nonnegative density g: starting from Q0, each selected
/// Q selects the maximal dyadic Q' strictly inside it with <g>_Q' > factor * <g>_Q.
/// The result is classified sparse(1) when it validates (always for factor >= 2), general otherwise.
CubeFamily cz_family(const GridFunction& g, double factor = 2.0);

}  // namespace oscnorm
