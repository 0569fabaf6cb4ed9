#pragma once

// Interval-simplex polytopes {x : a <= x <= b, sum(x) = 1} in canonical
// H-form and their vertex sets.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace rpomdp {

struct TransitionPolytope {
    std::size_t dim = 0;
    std::vector<double> lower;
    std::vector<double> upper;
    /// (2n+2) x n: rows -I, I, 1^T, -1^T.
    Eigen::MatrixXd A;
    /// (-a, b, 1, -1).
    Eigen::VectorXd c;

    /// Max over rows of (A x - c); <= 0 means x is inside.
    double max_violation(const std::vector<double>& x) const;
};

/// Builds the canonical form A x <= c. Throws GraphPreservationError for a
/// nonpositive lower bound and InfeasibleUncertaintyError when the box misses
/// the probability simplex.
TransitionPolytope canonical_form(const std::vector<double>& lower,
                                  const std::vector<double>& upper);

struct VertexSet {
    std::vector<std::vector<double>> vertices;

    std::size_t size() const { return vertices.size(); }
    bool empty() const { return vertices.empty(); }
};

inline constexpr std::size_t kDefaultVertexBudget = 4096;
inline constexpr double kVertexDedupTolerance = 1e-10;

/// Exact vertex set of the polytope. A vertex of box-and-hyperplane has every
/// coordinate at a bound except at most one, so each coordinate in turn is
/// left free and the others range over their bound assignments. Fixed
/// coordinates (a_i == b_i) are removed first and put back afterwards.
/// Throws VertexBudgetError when more than `budget` vertices would result.
VertexSet enumerate_vertices(const TransitionPolytope& poly,
                             std::size_t budget = kDefaultVertexBudget);

/// n * 2^(n-1), an upper bound on the vertex count in dimension n.
std::uint64_t vertex_count_bound(std::size_t n);

} // namespace rpomdp
