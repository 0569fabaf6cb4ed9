#include "rpomdp/model.hpp"

#include "rpomdp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace rpomdp {

void validate_successors(const SuccessorList& successors, std::size_t num_states,
                         const std::string& where) {
    if (successors.empty())
        throw ValidationError(where + ": no successors");
    double sum_lower = 0.0;
    double sum_upper = 0.0;
    std::vector<StateId> seen;
    seen.reserve(successors.size());
    for (const auto& succ : successors) {
        if (succ.state >= num_states)
            throw ValidationError(where + ": successor " + std::to_string(succ.state) +
                                  " out of range");
        if (!std::isfinite(succ.prob.lower) || !std::isfinite(succ.prob.upper))
            throw ValidationError(where + ": non-finite interval bound");
        if (succ.prob.lower <= 0.0)
            throw GraphPreservationError(where + ": lower bound of successor " +
                                         std::to_string(succ.state) +
                                         " must be strictly positive");
        if (succ.prob.lower > succ.prob.upper || succ.prob.upper > 1.0)
            throw ValidationError(where + ": interval for successor " +
                                  std::to_string(succ.state) + " must satisfy 0 < lo <= hi <= 1");
        sum_lower += succ.prob.lower;
        sum_upper += succ.prob.upper;
        seen.push_back(succ.state);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw ValidationError(where + ": duplicate successor");
    if (sum_lower > 1.0 + kDistributionTolerance || sum_upper < 1.0 - kDistributionTolerance)
        throw InfeasibleUncertaintyError(where + ": intervals admit no distribution (sum lo = " +
                                         std::to_string(sum_lower) + ", sum hi = " +
                                         std::to_string(sum_upper) + ")");
}

namespace {

void check_state_set(const std::vector<StateId>& set, std::size_t num_states, const char* name) {
    for (StateId s : set)
        if (s >= num_states)
            throw ValidationError(std::string(name) + " state " + std::to_string(s) +
                                  " out of range");
}

} // namespace

IntervalPomdp::IntervalPomdp(PomdpData data) : data_(std::move(data)) {
    const auto n = data_.num_states;
    if (n == 0)
        throw ValidationError("model has no states");
    if (data_.num_actions == 0)
        throw ValidationError("model has no actions");
    if (data_.num_observations == 0)
        throw ValidationError("model has no observations");
    if (data_.initial >= n)
        throw ValidationError("initial state out of range");
    if (data_.transitions.size() != n || data_.costs.size() != n || data_.observation.size() != n)
        throw ValidationError("per-state tables do not match the number of states");

    for (StateId s = 0; s < n; ++s) {
        if (data_.transitions[s].size() != data_.num_actions ||
            data_.costs[s].size() != data_.num_actions)
            throw ValidationError("state " + std::to_string(s) +
                                  " does not define every action");
        if (data_.observation[s] >= data_.num_observations)
            throw ValidationError("observation of state " + std::to_string(s) + " out of range");
        for (ActionId a = 0; a < data_.num_actions; ++a) {
            validate_successors(data_.transitions[s][a], n,
                                "state " + std::to_string(s) + ", action " + std::to_string(a));
            const double r = data_.costs[s][a];
            if (!std::isfinite(r) || r < 0.0)
                throw ValidationError("cost of state " + std::to_string(s) + ", action " +
                                      std::to_string(a) + " must be finite and nonnegative");
        }
    }
    check_state_set(data_.targets, n, "target");
    check_state_set(data_.goals, n, "goal");
}

bool IntervalPomdp::has_point_intervals() const {
    for (const auto& per_state : data_.transitions)
        for (const auto& succs : per_state)
            for (const auto& succ : succs)
                if (!succ.prob.is_point())
                    return false;
    return true;
}

bool operator==(const IntervalPomdp& a, const IntervalPomdp& b) {
    const auto& x = a.data_;
    const auto& y = b.data_;
    return x.num_states == y.num_states && x.num_actions == y.num_actions &&
           x.num_observations == y.num_observations && x.initial == y.initial &&
           x.transitions == y.transitions && x.costs == y.costs &&
           x.observation == y.observation && x.targets == y.targets && x.goals == y.goals;
}

Specification Specification::reach(double lambda, std::vector<StateId> targets) {
    return {SpecKind::ReachAtLeast, lambda, std::move(targets)};
}

Specification Specification::cost(double kappa, std::vector<StateId> goals) {
    return {SpecKind::ExpCostAtMost, kappa, std::move(goals)};
}

void Specification::validate(std::size_t num_states) const {
    if (is_reach()) {
        if (!(threshold >= 0.0 && threshold <= 1.0))
            throw ValidationError("reachability threshold must lie in [0, 1], got " +
                                  std::to_string(threshold));
    } else if (!(threshold >= 0.0) || !std::isfinite(threshold)) {
        throw ValidationError("cost threshold must be finite and nonnegative, got " +
                              std::to_string(threshold));
    }
    if (targets.empty())
        throw ValidationError("specification has an empty target set");
    check_state_set(targets, num_states, is_reach() ? "target" : "goal");
}

std::string Specification::to_string() const {
    std::ostringstream out;
    out << (is_reach() ? "reach>=" : "cost<=") << threshold << "@";
    for (std::size_t i = 0; i < targets.size(); ++i)
        out << (i ? "," : "") << targets[i];
    return out.str();
}

Policy Policy::uniform(std::size_t num_observations, std::size_t num_actions) {
    return Policy(std::vector<std::vector<double>>(
        num_observations,
        std::vector<double>(num_actions, 1.0 / static_cast<double>(num_actions))));
}

void Policy::validate(std::size_t num_observations, std::size_t num_actions) const {
    if (probs_.size() != num_observations)
        throw ContractViolation("policy covers " + std::to_string(probs_.size()) +
                                " observations, model has " + std::to_string(num_observations));
    for (ObsId z = 0; z < probs_.size(); ++z) {
        const auto& row = probs_[z];
        if (row.size() != num_actions)
            throw ContractViolation("policy row for observation " + std::to_string(z) +
                                    " has the wrong number of actions");
        double sum = 0.0;
        for (double p : row) {
            if (!std::isfinite(p))
                throw ContractViolation("policy entry is not finite");
            if (p <= 0.0)
                throw GraphPreservationError("policy assigns probability 0 to an action at "
                                             "observation " +
                                             std::to_string(z));
            sum += p;
        }
        if (std::abs(sum - 1.0) > kDistributionTolerance)
            throw ContractViolation("policy row for observation " + std::to_string(z) +
                                    " does not sum to 1");
    }
}

IntervalMarkovChain::IntervalMarkovChain(StateId initial, std::vector<SuccessorList> transitions,
                                         std::vector<double> costs)
    : initial_(initial), transitions_(std::move(transitions)), costs_(std::move(costs)) {
    const auto n = transitions_.size();
    if (n == 0 || initial_ >= n)
        throw ValidationError("chain initial state out of range");
    if (costs_.size() != n)
        throw ValidationError("chain cost table does not match the number of states");
    for (StateId s = 0; s < n; ++s) {
        validate_successors(transitions_[s], n, "chain state " + std::to_string(s));
        if (!std::isfinite(costs_[s]) || costs_[s] < 0.0)
            throw ValidationError("chain cost must be finite and nonnegative");
    }
}

IntervalMarkovChain induce_chain(const IntervalPomdp& model, const Policy& policy) {
    policy.validate(model.num_observations(), model.num_actions());

    std::vector<SuccessorList> transitions(model.num_states());
    std::vector<double> costs(model.num_states(), 0.0);
    for (StateId s = 0; s < model.num_states(); ++s) {
        const auto& sigma = policy.row(model.observation(s));
        std::map<StateId, Interval> merged;
        double cost = 0.0;
        for (ActionId a = 0; a < model.num_actions(); ++a) {
            for (const auto& succ : model.successors(s, a)) {
                auto& iv = merged[succ.state];
                iv.lower += sigma[a] * succ.prob.lower;
                iv.upper += sigma[a] * succ.prob.upper;
            }
            cost += sigma[a] * model.cost(s, a);
        }
        auto& out = transitions[s];
        out.reserve(merged.size());
        // Rounding can push a sum of probabilities just past 1.
        for (const auto& [state, iv] : merged) {
            const double hi = std::min(iv.upper, 1.0);
            out.push_back({state, {std::min(iv.lower, hi), hi}});
        }
        costs[s] = cost;
    }
    return IntervalMarkovChain(model.initial(), std::move(transitions), std::move(costs));
}

IntervalPomdp instantiate(const IntervalPomdp& model, const TransitionChoice& choice) {
    PomdpData data = model.data();
    if (choice.size() != model.num_states())
        throw InvalidInstantiationError("choice does not cover every state");
    for (StateId s = 0; s < model.num_states(); ++s) {
        if (choice[s].size() != model.num_actions())
            throw InvalidInstantiationError("choice does not cover every action of state " +
                                            std::to_string(s));
        for (ActionId a = 0; a < model.num_actions(); ++a) {
            auto& succs = data.transitions[s][a];
            const auto& values = choice[s][a];
            if (values.size() != succs.size())
                throw InvalidInstantiationError("choice for state " + std::to_string(s) +
                                                ", action " + std::to_string(a) +
                                                " has the wrong number of entries");
            double sum = 0.0;
            for (std::size_t k = 0; k < succs.size(); ++k) {
                if (!succs[k].prob.contains(values[k]))
                    throw InvalidInstantiationError(
                        "value " + std::to_string(values[k]) + " for state " + std::to_string(s) +
                        ", action " + std::to_string(a) + ", successor " +
                        std::to_string(succs[k].state) + " lies outside its interval");
                succs[k].prob = {values[k], values[k]};
                sum += values[k];
            }
            if (std::abs(sum - 1.0) > kDistributionTolerance)
                throw InvalidInstantiationError("choice for state " + std::to_string(s) +
                                                ", action " + std::to_string(a) +
                                                " does not sum to 1");
        }
    }
    return IntervalPomdp(std::move(data));
}

} // namespace rpomdp
