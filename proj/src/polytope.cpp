#include "rpomdp/polytope.hpp"

#include "rpomdp/errors.hpp"
#include "rpomdp/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rpomdp {

namespace {

// Slack allowed when the free coordinate lands just outside its bounds
// through rounding; such values are clamped back.
constexpr double kBoundSlack = 1e-12;

// Beyond this many free coordinates the bound-assignment sweep itself is
// unreasonable, whatever the budget.
constexpr std::size_t kMaxFreeCoordinates = 30;

bool same_vertex(const std::vector<double>& x, const std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i)
        if (std::abs(x[i] - y[i]) > kVertexDedupTolerance)
            return false;
    return true;
}

} // namespace

double TransitionPolytope::max_violation(const std::vector<double>& x) const {
    Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
    return (A * v - c).maxCoeff();
}

TransitionPolytope canonical_form(const std::vector<double>& lower,
                                  const std::vector<double>& upper) {
    const std::size_t n = lower.size();
    if (n == 0 || upper.size() != n)
        throw ContractViolation("polytope bounds must be nonempty and of equal length");
    double sum_lower = 0.0;
    double sum_upper = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (lower[i] <= 0.0)
            throw GraphPreservationError("polytope lower bound " + std::to_string(i) +
                                         " must be strictly positive");
        if (lower[i] > upper[i] || upper[i] > 1.0)
            throw ContractViolation("polytope bounds must satisfy 0 < a_i <= b_i <= 1");
        sum_lower += lower[i];
        sum_upper += upper[i];
    }
    if (sum_lower > 1.0 + kDistributionTolerance || sum_upper < 1.0 - kDistributionTolerance)
        throw InfeasibleUncertaintyError("interval box does not meet the probability simplex");

    const auto dim = static_cast<Eigen::Index>(n);
    TransitionPolytope poly;
    poly.dim = n;
    poly.lower = lower;
    poly.upper = upper;
    poly.A = Eigen::MatrixXd::Zero(2 * dim + 2, dim);
    poly.c = Eigen::VectorXd::Zero(2 * dim + 2);
    poly.A.topRows(dim) = -Eigen::MatrixXd::Identity(dim, dim);
    poly.A.middleRows(dim, dim) = Eigen::MatrixXd::Identity(dim, dim);
    poly.A.row(2 * dim).setOnes();
    poly.A.row(2 * dim + 1).setConstant(-1.0);
    for (Eigen::Index i = 0; i < dim; ++i) {
        poly.c(i) = -lower[static_cast<std::size_t>(i)];
        poly.c(dim + i) = upper[static_cast<std::size_t>(i)];
    }
    poly.c(2 * dim) = 1.0;
    poly.c(2 * dim + 1) = -1.0;
    return poly;
}

VertexSet enumerate_vertices(const TransitionPolytope& poly, std::size_t budget) {
    const std::size_t n = poly.dim;
    const auto& a = poly.lower;
    const auto& b = poly.upper;

    std::vector<std::size_t> free;
    double fixed_mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == b[i])
            fixed_mass += a[i];
        else
            free.push_back(i);
    }
    const double remaining = 1.0 - fixed_mass;
    const std::size_t m = free.size();

    VertexSet out;
    std::vector<double> base(n);
    for (std::size_t i = 0; i < n; ++i)
        base[i] = a[i];

    if (m == 0) {
        out.vertices.push_back(base);
        return out;
    }
    if (m == 1) {
        const std::size_t j = free[0];
        base[j] = std::clamp(remaining, a[j], b[j]);
        out.vertices.push_back(base);
        return out;
    }
    if (m > kMaxFreeCoordinates)
        throw VertexBudgetError("polytope has " + std::to_string(m) +
                                " free coordinates; sparsify the model");

    const std::uint64_t assignments = std::uint64_t{1} << (m - 1);
    for (std::size_t jj = 0; jj < m; ++jj) {
        const std::size_t j = free[jj];
        for (std::uint64_t mask = 0; mask < assignments; ++mask) {
            std::vector<double> x = base;
            double others = 0.0;
            std::size_t bit = 0;
            for (std::size_t kk = 0; kk < m; ++kk) {
                if (kk == jj)
                    continue;
                const std::size_t k = free[kk];
                x[k] = ((mask >> bit) & 1U) ? b[k] : a[k];
                others += x[k];
                ++bit;
            }
            const double xj = remaining - others;
            if (xj < a[j] - kBoundSlack || xj > b[j] + kBoundSlack)
                continue;
            x[j] = std::clamp(xj, a[j], b[j]);
            const bool duplicate = std::any_of(out.vertices.begin(), out.vertices.end(),
                                               [&](const auto& v) { return same_vertex(v, x); });
            if (duplicate)
                continue;
            if (out.vertices.size() >= budget)
                throw VertexBudgetError("state-action polytope exceeds the vertex budget of " +
                                        std::to_string(budget) + "; sparsify the model");
            out.vertices.push_back(std::move(x));
        }
    }
    return out;
}

std::uint64_t vertex_count_bound(std::size_t n) {
    if (n == 0)
        throw ContractViolation("vertex_count_bound requires n >= 1");
    return static_cast<std::uint64_t>(n) << (n - 1);
}

} // namespace rpomdp
