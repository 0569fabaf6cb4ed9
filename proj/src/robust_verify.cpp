#include "rpomdp/robust_verify.hpp"

#include "rpomdp/errors.hpp"
#include "rpomdp/polytope.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace rpomdp {

double worst_case_expectation(const SuccessorList& successors, std::span<const double> values,
                              Nature nature, std::vector<double>& distribution) {
    const std::size_t k = successors.size();
    distribution.resize(k);
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    const auto value_of = [&](std::size_t i) { return values[successors[i].state]; };
    if (nature == Nature::Minimize)
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t i, std::size_t j) { return value_of(i) < value_of(j); });
    else
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t i, std::size_t j) { return value_of(i) > value_of(j); });

    double mass = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        distribution[i] = successors[i].prob.lower;
        mass -= distribution[i];
    }
    for (std::size_t i : order) {
        if (mass <= 0.0)
            break;
        const double room = successors[i].prob.upper - successors[i].prob.lower;
        const double add = std::min(room, mass);
        distribution[i] += add;
        mass -= add;
    }
    double result = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        if (distribution[i] != 0.0)
            result += distribution[i] * value_of(i);
    return result;
}

double worst_case_expectation(const SuccessorList& successors, std::span<const double> values,
                              Nature nature) {
    std::vector<double> distribution;
    return worst_case_expectation(successors, values, nature, distribution);
}

namespace {

std::vector<std::vector<StateId>> predecessors(const IntervalMarkovChain& chain,
                                               const std::vector<bool>& absorbing) {
    std::vector<std::vector<StateId>> pred(chain.num_states());
    for (StateId s = 0; s < chain.num_states(); ++s) {
        if (absorbing[s])
            continue;
        for (const auto& succ : chain.successors(s))
            pred[succ.state].push_back(s);
    }
    return pred;
}

std::vector<bool> backward_closure(const std::vector<std::vector<StateId>>& pred,
                                   std::vector<bool> marked) {
    std::vector<StateId> stack;
    for (StateId s = 0; s < marked.size(); ++s)
        if (marked[s])
            stack.push_back(s);
    while (!stack.empty()) {
        const StateId s = stack.back();
        stack.pop_back();
        for (StateId p : pred[s])
            if (!marked[p]) {
                marked[p] = true;
                stack.push_back(p);
            }
    }
    return marked;
}

std::vector<bool> membership(std::size_t n, const std::vector<StateId>& set) {
    std::vector<bool> in(n, false);
    for (StateId s : set) {
        if (s >= n)
            throw ContractViolation("target state " + std::to_string(s) + " out of range");
        in[s] = true;
    }
    return in;
}

void require_nonempty(const std::vector<StateId>& set) {
    if (set.empty())
        throw ContractViolation("target set must be nonempty");
}

constexpr std::size_t kPolishPeriod = 1000;

// Replaces the iterate by the exact values of the chain nature picks
// greedily at it, re-solving while the greedy choice moves. The result is
// kept only when it is a fixed point of the robust operator to rounding,
// which is then the robust value (it is unique once the graph prechecks
// have fixed the other states). Returns whether `value` was replaced and
// sets `residual` to the sup-norm Bellman residual of the new values.
bool polish(const IntervalMarkovChain& chain, const std::vector<StateId>& active, Nature nature,
            bool with_costs, std::vector<double>& value, double& residual) {
    if (active.empty())
        return false;
    const std::size_t n = chain.num_states();
    std::vector<Eigen::Index> index(n, -1);
    for (std::size_t i = 0; i < active.size(); ++i)
        index[active[i]] = static_cast<Eigen::Index>(i);
    const auto m = static_cast<Eigen::Index>(active.size());
    auto bellman = [&](StateId s, const std::vector<double>& v, std::vector<double>& dist) {
        return (with_costs ? chain.cost(s) : 0.0) +
               worst_case_expectation(chain.successors(s), v, nature, dist);
    };

    std::vector<double> current = value;
    std::vector<double> dist;
    for (int round = 0; round < 8; ++round) {
        std::vector<Eigen::Triplet<double>> entries;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const StateId s = active[static_cast<std::size_t>(i)];
            bellman(s, current, dist);
            entries.emplace_back(i, i, 1.0);
            rhs(i) = with_costs ? chain.cost(s) : 0.0;
            const auto& succ = chain.successors(s);
            for (std::size_t k = 0; k < succ.size(); ++k) {
                const Eigen::Index j = index[succ[k].state];
                if (j >= 0)
                    entries.emplace_back(i, j, -dist[k]);
                else
                    rhs(i) += dist[k] * value[succ[k].state];
            }
        }
        Eigen::SparseMatrix<double> A(m, m);
        A.setFromTriplets(entries.begin(), entries.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
        if (lu.info() != Eigen::Success)
            return false;
        const Eigen::VectorXd x = lu.solve(rhs);
        if (lu.info() != Eigen::Success || !x.allFinite())
            return false;
        for (Eigen::Index i = 0; i < m; ++i)
            current[active[static_cast<std::size_t>(i)]] = x(i);

        double relative = 0.0, absolute = 0.0;
        for (StateId s : active) {
            const double gap = std::abs(bellman(s, current, dist) - current[s]);
            relative = std::max(relative, gap / std::max(1.0, std::abs(current[s])));
            absolute = std::max(absolute, gap);
        }
        if (relative <= 1e-12) {
            value = std::move(current);
            residual = absolute;
            return true;
        }
    }
    return false;
}

} // namespace

std::vector<bool> can_reach(const IntervalMarkovChain& chain, const std::vector<StateId>& targets) {
    const auto in_target = membership(chain.num_states(), targets);
    return backward_closure(predecessors(chain, in_target), in_target);
}

std::vector<bool> infinite_cost_states(const IntervalMarkovChain& chain,
                                       const std::vector<StateId>& goals) {
    const auto in_goal = membership(chain.num_states(), goals);
    const auto reaches_goal = can_reach(chain, goals);
    std::vector<bool> stuck(chain.num_states());
    for (StateId s = 0; s < chain.num_states(); ++s)
        stuck[s] = !reaches_goal[s];
    return backward_closure(predecessors(chain, in_goal), std::move(stuck));
}

RobustValues robust_reach(const IntervalMarkovChain& chain, const std::vector<StateId>& targets,
                          const VerifySettings& settings) {
    require_nonempty(targets);
    const std::size_t n = chain.num_states();
    const auto in_target = membership(n, targets);
    const auto live = can_reach(chain, targets);

    std::vector<StateId> active;
    std::vector<double> value(n, 0.0);
    for (StateId s = 0; s < n; ++s) {
        if (in_target[s])
            value[s] = 1.0;
        else if (live[s])
            active.push_back(s);
    }

    RobustValues out;
    std::vector<double> next = value;
    std::vector<double> scratch;
    for (std::size_t it = 1;; ++it) {
        double residual = 0.0;
        for (StateId s : active) {
            next[s] = worst_case_expectation(chain.successors(s), value, Nature::Minimize, scratch);
            residual = std::max(residual, std::abs(next[s] - value[s]));
        }
        value.swap(next);
        if (settings.observer)
            settings.observer(it, value);
        out.iterations = it;
        out.residual = residual;
        if (residual <= settings.tolerance) {
            out.converged = true;
            break;
        }
        if (it % kPolishPeriod == 0 &&
            polish(chain, active, Nature::Minimize, false, value, out.residual)) {
            out.converged = true;
            break;
        }
        if (it >= settings.max_iterations && !settings.throw_on_cap)
            break;
        if (it >= settings.max_iterations)
            throw ConvergenceError("robust reachability did not converge within " +
                                       std::to_string(settings.max_iterations) +
                                       " iterations (residual " + std::to_string(residual) + ")",
                                   residual);
    }
    if (out.converged)
        polish(chain, active, Nature::Minimize, false, value, out.residual);
    for (double& v : value)
        v = std::clamp(v, 0.0, 1.0);
    out.reach = std::move(value);
    return out;
}

RobustValues robust_cost(const IntervalMarkovChain& chain, const std::vector<StateId>& goals,
                         const VerifySettings& settings) {
    require_nonempty(goals);
    const std::size_t n = chain.num_states();
    const auto in_goal = membership(n, goals);
    const auto infinite = infinite_cost_states(chain, goals);
    if (infinite[chain.initial()])
        throw InfiniteCostError("goal set is not reached almost surely from the initial state " +
                                std::to_string(chain.initial()));

    std::vector<StateId> active;
    std::vector<double> value(n, 0.0);
    for (StateId s = 0; s < n; ++s) {
        if (infinite[s])
            value[s] = kInfiniteCost;
        else if (!in_goal[s])
            active.push_back(s);
    }

    RobustValues out;
    std::vector<double> next = value;
    std::vector<double> scratch;
    for (std::size_t it = 1;; ++it) {
        double residual = 0.0;
        for (StateId s : active) {
            next[s] = chain.cost(s) +
                      worst_case_expectation(chain.successors(s), value, Nature::Maximize, scratch);
            residual = std::max(residual, std::abs(next[s] - value[s]));
        }
        value.swap(next);
        if (settings.observer)
            settings.observer(it, value);
        out.iterations = it;
        out.residual = residual;
        if (residual <= settings.tolerance) {
            out.converged = true;
            break;
        }
        if (it % kPolishPeriod == 0 &&
            polish(chain, active, Nature::Maximize, true, value, out.residual)) {
            out.converged = true;
            break;
        }
        if (it >= settings.max_iterations && !settings.throw_on_cap)
            break;
        if (it >= settings.max_iterations)
            throw ConvergenceError("robust expected cost did not converge within " +
                                       std::to_string(settings.max_iterations) +
                                       " iterations (residual " + std::to_string(residual) + ")",
                                   residual);
    }
    if (out.converged)
        polish(chain, active, Nature::Maximize, true, value, out.residual);
    out.cost = std::move(value);
    return out;
}

double vertex_adversary_oracle(const IntervalMarkovChain& chain, const Specification& spec,
                               std::size_t max_combinations) {
    spec.validate(chain.num_states());
    const std::size_t n = chain.num_states();
    const auto in_target = membership(n, spec.targets);

    // States whose value is fixed by the graph alone are left out of the
    // adversary's choice.
    std::vector<bool> fixed(n, false);
    std::vector<double> fixed_value(n, 0.0);
    if (spec.is_reach()) {
        const auto live = can_reach(chain, spec.targets);
        for (StateId s = 0; s < n; ++s) {
            fixed[s] = in_target[s] || !live[s];
            fixed_value[s] = in_target[s] ? 1.0 : 0.0;
        }
    } else {
        const auto infinite = infinite_cost_states(chain, spec.targets);
        if (infinite[chain.initial()])
            throw InfiniteCostError("goal set is not reached almost surely from the initial state");
        for (StateId s = 0; s < n; ++s) {
            fixed[s] = in_target[s] || infinite[s];
            fixed_value[s] = infinite[s] ? kInfiniteCost : 0.0;
        }
    }
    if (fixed[chain.initial()])
        return fixed_value[chain.initial()];

    std::vector<StateId> free;
    std::vector<VertexSet> vertices;
    std::size_t combinations = 1;
    for (StateId s = 0; s < n; ++s) {
        if (fixed[s])
            continue;
        std::vector<double> lo;
        std::vector<double> hi;
        for (const auto& succ : chain.successors(s)) {
            lo.push_back(succ.prob.lower);
            hi.push_back(succ.prob.upper);
        }
        free.push_back(s);
        vertices.push_back(enumerate_vertices(canonical_form(lo, hi)));
        combinations *= vertices.back().size();
        if (combinations > max_combinations)
            throw OracleTooLargeError("vertex adversary oracle needs more than " +
                                      std::to_string(max_combinations) + " combinations");
    }

    std::vector<Eigen::Index> position(n, -1);
    for (std::size_t i = 0; i < free.size(); ++i)
        position[free[i]] = static_cast<Eigen::Index>(i);
    const auto m = static_cast<Eigen::Index>(free.size());
    const Eigen::Index init = position[chain.initial()];

    double best = spec.is_reach() ? kInfiniteCost : -kInfiniteCost;
    std::vector<std::size_t> choice(free.size(), 0);
    Eigen::MatrixXd system(m, m);
    Eigen::VectorXd rhs(m);
    for (std::size_t combo = 0; combo < combinations; ++combo) {
        system.setIdentity();
        rhs.setZero();
        for (std::size_t i = 0; i < free.size(); ++i) {
            const StateId s = free[i];
            const auto& succs = chain.successors(s);
            const auto& x = vertices[i].vertices[choice[i]];
            if (!spec.is_reach())
                rhs(static_cast<Eigen::Index>(i)) += chain.cost(s);
            for (std::size_t k = 0; k < succs.size(); ++k) {
                const StateId t = succs[k].state;
                if (position[t] >= 0)
                    system(static_cast<Eigen::Index>(i), position[t]) -= x[k];
                else
                    rhs(static_cast<Eigen::Index>(i)) += x[k] * fixed_value[t];
            }
        }
        const Eigen::VectorXd solution = system.fullPivLu().solve(rhs);
        const double v = solution(init);
        best = spec.is_reach() ? std::min(best, v) : std::max(best, v);

        for (std::size_t i = 0; i < choice.size(); ++i) {
            if (++choice[i] < vertices[i].size())
                break;
            choice[i] = 0;
        }
    }
    return best;
}

CheckResult check(const IntervalMarkovChain& chain, const std::vector<Specification>& specs,
                  const VerifySettings& settings) {
    CheckResult result;
    result.satisfied = true;
    for (const auto& spec : specs) {
        spec.validate(chain.num_states());
        if (spec.is_reach()) {
            auto values = robust_reach(chain, spec.targets, settings);
            const double v = values.reach[chain.initial()];
            result.satisfied = result.satisfied && values.converged && v >= spec.threshold;
            result.initial_values.push_back(v);
            result.values.push_back(std::move(values));
        } else {
            auto values = robust_cost(chain, spec.targets, settings);
            const double v = values.cost[chain.initial()];
            result.satisfied = result.satisfied && values.converged && v <= spec.threshold;
            result.initial_values.push_back(v);
            result.values.push_back(std::move(values));
        }
    }
    return result;
}

} // namespace rpomdp
