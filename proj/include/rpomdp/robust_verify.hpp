#pragma once

// Robust value iteration on interval Markov chains. Nature resolves the
// intervals adversarially at every step: it minimises reachability
// probabilities and maximises expected costs.

#include "rpomdp/model.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace rpomdp {

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

struct RobustValues {
    /// Worst-case probability of reaching the target set, per state. Empty
    /// when only costs were computed.
    std::vector<double> reach;
    /// Worst-case expected cost to the goal set, per state (+inf where the
    /// goal is not reached almost surely). Empty when only reachability was
    /// computed.
    std::vector<double> cost;
    bool converged = false;
    std::size_t iterations = 0;
    /// Sup-norm change of the last sweep.
    double residual = 0.0;
};

struct VerifySettings {
    double tolerance = 1e-8;
    std::size_t max_iterations = 100000;
    /// When false, hitting the cap returns the last iterate with
    /// converged == false instead of throwing ConvergenceError. Unconverged
    /// values never satisfy a specification in check().
    bool throw_on_cap = true;
    /// Called after every sweep with the iteration number and the new iterate.
    std::function<void(std::size_t, std::span<const double>)> observer;
};

enum class Nature { Minimize, Maximize };

/// Exact inner step: optimises sum_k x_k * values[succ_k] over the interval
/// polytope of `successors`. Lower bounds are assigned first and the residual
/// mass goes to successors in ascending (Minimize) or descending (Maximize)
/// value order, each up to its upper bound.
double worst_case_expectation(const SuccessorList& successors, std::span<const double> values,
                              Nature nature);

/// Same as above, also returning the chosen distribution (aligned with
/// `successors`).
double worst_case_expectation(const SuccessorList& successors, std::span<const double> values,
                              Nature nature, std::vector<double>& distribution);

/// States with a path to `targets` in the support graph of the chain.
std::vector<bool> can_reach(const IntervalMarkovChain& chain, const std::vector<StateId>& targets);

/// States from which `goals` is not reached almost surely (under any
/// resolution of the intervals, since lower bounds are positive).
std::vector<bool> infinite_cost_states(const IntervalMarkovChain& chain,
                                       const std::vector<StateId>& goals);

/// Every 1000 sweeps, and once more at convergence, the iterate is replaced by
/// the exact values of the chain nature picks greedily at it, provided those
/// are a fixed point of the robust operator.

/// Minimal probability of eventually reaching `targets`. Throws
/// ConvergenceError when the iteration cap is hit.
RobustValues robust_reach(const IntervalMarkovChain& chain, const std::vector<StateId>& targets,
                          const VerifySettings& settings = {});

/// Maximal expected cost of reaching `goals`. Throws InfiniteCostError when
/// the initial state does not reach the goals almost surely and
/// ConvergenceError when the iteration cap is hit.
RobustValues robust_cost(const IntervalMarkovChain& chain, const std::vector<StateId>& goals,
                         const VerifySettings& settings = {});

inline constexpr std::size_t kOracleMaxCombinations = 1'000'000;

/// Brute force over stationary vertex adversaries: every combination of
/// per-state polytope vertices is solved as an exact Markov chain. Returns
/// the minimal reachability (or maximal cost) at the initial state.
double vertex_adversary_oracle(const IntervalMarkovChain& chain, const Specification& spec,
                               std::size_t max_combinations = kOracleMaxCombinations);

struct CheckResult {
    bool satisfied = false;
    /// One entry per specification, in order.
    std::vector<RobustValues> values;
    /// Robust value at the initial state, per specification.
    std::vector<double> initial_values;
};

/// Robust model checking of a chain against a conjunction of specifications.
CheckResult check(const IntervalMarkovChain& chain, const std::vector<Specification>& specs,
                  const VerifySettings& settings = {});

} // namespace rpomdp
