#include "oracles.hpp"

#include "rpomdp/errors.hpp"
#include "rpomdp/model.hpp"

#include <doctest.h>

#include <random>

using namespace rpomdp;

namespace {

// Two actions from state 0: action 0 goes to 1 or 2, action 1 goes to 2.
IntervalPomdp two_action_model(Interval a, Interval b) {
    PomdpData d;
    d.num_states = 3;
    d.num_actions = 2;
    d.num_observations = 1;
    d.transitions = {{{{1, a}, {2, b}}, {{2, {1.0, 1.0}}}},
                     {{{1, {1.0, 1.0}}}, {{1, {1.0, 1.0}}}},
                     {{{2, {1.0, 1.0}}}, {{2, {1.0, 1.0}}}}};
    d.costs = {{1.0, 3.0}, {0.0, 0.0}, {0.0, 0.0}};
    d.observation = {0, 0, 0};
    d.targets = {1};
    return IntervalPomdp(std::move(d));
}

IntervalPomdp random_model(std::size_t n, std::size_t actions, std::size_t observations,
                           std::mt19937_64& rng, bool point) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_int_distribution<std::size_t> obs(0, observations - 1);
    std::uniform_int_distribution<std::size_t> count(1, 3);
    PomdpData d;
    d.num_states = n;
    d.num_actions = actions;
    d.num_observations = observations;
    d.transitions.assign(n, std::vector<SuccessorList>(actions));
    d.costs.assign(n, std::vector<double>(actions, 0.0));
    for (StateId s = 0; s < n; ++s) {
        d.observation.push_back(s < observations ? s : obs(rng));
        for (ActionId a = 0; a < actions; ++a) {
            std::vector<StateId> succ;
            const std::size_t k = count(rng);
            while (succ.size() < k) {
                const StateId t = pick(rng);
                if (std::find(succ.begin(), succ.end(), t) == succ.end())
                    succ.push_back(t);
            }
            const auto iv = oracle::random_intervals(succ.size(), rng, point ? 1.0 : 0.0);
            for (std::size_t i = 0; i < succ.size(); ++i)
                d.transitions[s][a].push_back({succ[i], iv[i]});
            d.costs[s][a] = static_cast<double>(s + a);
        }
    }
    return IntervalPomdp(std::move(d));
}

Policy random_policy(std::size_t observations, std::size_t actions, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<std::vector<double>> p(observations, std::vector<double>(actions));
    for (auto& row : p) {
        double sum = 0.0;
        for (double& v : row)
            sum += v = u(rng);
        for (double& v : row)
            v /= sum;
    }
    return Policy(std::move(p));
}

} // namespace

TEST_CASE("induce_chain: single action copies the model") {
    PomdpData d;
    d.num_states = 2;
    d.num_actions = 1;
    d.num_observations = 2;
    d.transitions = {{{{0, {0.2, 0.5}}, {1, {0.5, 0.8}}}}, {{{1, {1.0, 1.0}}}}};
    d.costs = {{2.0}, {0.0}};
    d.observation = {0, 1};
    const IntervalPomdp model(d);
    const auto chain = induce_chain(model, Policy::uniform(2, 1));
    CHECK(chain.successors(0) == d.transitions[0][0]);
    CHECK(chain.successors(1) == d.transitions[1][0]);
    CHECK(chain.cost(0) == 2.0);
}

TEST_CASE("induce_chain: convex combination of point distributions") {
    const auto model = two_action_model({0.5, 0.5}, {0.5, 0.5});
    const auto chain = induce_chain(model, Policy({{0.5, 0.5}}));
    const auto& succ = chain.successors(0);
    REQUIRE(succ.size() == 2);
    CHECK(succ[0].state == 1);
    CHECK(succ[0].prob.lower == doctest::Approx(0.25));
    CHECK(succ[0].prob.upper == doctest::Approx(0.25));
    CHECK(succ[1].state == 2);
    CHECK(succ[1].prob.lower == doctest::Approx(0.75));
    CHECK(succ[1].prob.upper == doctest::Approx(0.75));
    CHECK(chain.cost(0) == doctest::Approx(2.0));
}

TEST_CASE("induce_chain: matches a direct re-derivation on random models") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const auto model = random_model(4, 2, 3, rng, false);
        const auto policy = random_policy(3, 2, rng);
        const auto chain = induce_chain(model, policy);
        for (StateId s = 0; s < 4; ++s) {
            for (StateId t = 0; t < 4; ++t) {
                double lo = 0.0, hi = 0.0;
                bool present = false;
                for (ActionId a = 0; a < 2; ++a)
                    for (const auto& x : model.successors(s, a))
                        if (x.state == t) {
                            present = true;
                            lo += policy.prob(model.observation(s), a) * x.prob.lower;
                            hi += policy.prob(model.observation(s), a) * x.prob.upper;
                        }
                const auto& succ = chain.successors(s);
                const auto it = std::find_if(succ.begin(), succ.end(),
                                             [&](const Successor& x) { return x.state == t; });
                REQUIRE(present == (it != succ.end()));
                if (present) {
                    CHECK(it->prob.lower == doctest::Approx(lo).epsilon(1e-12));
                    CHECK(it->prob.upper == doctest::Approx(std::min(hi, 1.0)).epsilon(1e-12));
                }
            }
            double cost = 0.0;
            for (ActionId a = 0; a < 2; ++a)
                cost += policy.prob(model.observation(s), a) * model.cost(s, a);
            CHECK(chain.cost(s) == doctest::Approx(cost));
        }
    }
}

TEST_CASE("induce_chain: policy errors") {
    const auto model = two_action_model({0.3, 0.7}, {0.3, 0.7});
    CHECK_THROWS_AS(induce_chain(model, Policy(std::vector<std::vector<double>>{})), ContractViolation);
    CHECK_THROWS_AS(induce_chain(model, Policy({{1.0, 0.0}})), GraphPreservationError);
    CHECK_THROWS_AS(induce_chain(model, Policy({{0.6, 0.6}})), ContractViolation);
}

TEST_CASE("instantiate: identity, valid and invalid choices") {
    const auto point = two_action_model({0.5, 0.5}, {0.5, 0.5});
    const TransitionChoice identity = {{{0.5, 0.5}, {1.0}}, {{1.0}, {1.0}}, {{1.0}, {1.0}}};
    CHECK(instantiate(point, identity) == point);

    const auto wide = two_action_model({0.3, 0.7}, {0.3, 0.7});
    const auto inst = instantiate(wide, {{{0.4, 0.6}, {1.0}}, {{1.0}, {1.0}}, {{1.0}, {1.0}}});
    CHECK(inst.has_point_intervals());
    CHECK(inst.successors(0, 0)[0].prob == Interval{0.4, 0.4});

    CHECK_THROWS_AS(instantiate(wide, {{{0.2, 0.8}, {1.0}}, {{1.0}, {1.0}}, {{1.0}, {1.0}}}),
                    InvalidInstantiationError);
    CHECK_THROWS_AS(instantiate(wide, {{{0.4, 0.5}, {1.0}}, {{1.0}, {1.0}}, {{1.0}, {1.0}}}),
                    InvalidInstantiationError);
}

TEST_CASE("induce and instantiate commute on point models") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const auto model = random_model(5, 3, 2, rng, true);
        const auto policy = random_policy(2, 3, rng);
        TransitionChoice choice(5, std::vector<std::vector<double>>(3));
        for (StateId s = 0; s < 5; ++s)
            for (ActionId a = 0; a < 3; ++a)
                for (const auto& x : model.successors(s, a))
                    choice[s][a].push_back(x.prob.lower);
        const auto a = induce_chain(model, policy);
        const auto b = induce_chain(instantiate(model, choice), policy);
        for (StateId s = 0; s < 5; ++s) {
            REQUIRE(a.successors(s).size() == b.successors(s).size());
            for (std::size_t k = 0; k < a.successors(s).size(); ++k) {
                CHECK(a.successors(s)[k].state == b.successors(s)[k].state);
                CHECK(std::abs(a.successors(s)[k].prob.lower - b.successors(s)[k].prob.lower) <=
                      1e-12);
                CHECK(std::abs(a.successors(s)[k].prob.upper - b.successors(s)[k].prob.upper) <=
                      1e-12);
            }
        }
    }
}

TEST_CASE("states sharing an observation get the same distribution") {
    std::mt19937_64 rng(3);
    const auto model = random_model(6, 2, 2, rng, true);
    const auto policy = random_policy(2, 2, rng);
    for (StateId s = 0; s < 6; ++s)
        for (StateId t = 0; t < 6; ++t)
            if (model.observation(s) == model.observation(t))
                CHECK(policy.row(model.observation(s)) == policy.row(model.observation(t)));
}

TEST_CASE("model validation") {
    CHECK_THROWS_AS(two_action_model({0.0, 0.5}, {0.5, 1.0}), GraphPreservationError);
    CHECK_THROWS_AS(two_action_model({0.6, 0.7}, {0.6, 0.7}), InfeasibleUncertaintyError);
    CHECK_THROWS_AS(two_action_model({0.1, 0.2}, {0.1, 0.2}), InfeasibleUncertaintyError);
    CHECK_THROWS_AS(two_action_model({0.5, 0.4}, {0.5, 0.6}), ValidationError);

    PomdpData d;
    d.num_states = 1;
    d.num_actions = 1;
    d.num_observations = 1;
    d.transitions = {{{{0, {1.0, 1.0}}}}};
    d.costs = {{-1.0}};
    d.observation = {0};
    CHECK_THROWS_AS(IntervalPomdp{d}, ValidationError);
    d.costs = {{0.0}};
    d.observation = {1};
    CHECK_THROWS_AS(IntervalPomdp{d}, ValidationError);
}

TEST_CASE("specification validation") {
    CHECK_NOTHROW(Specification::reach(0.0, {1}).validate(2));
    CHECK_THROWS_AS(Specification::reach(1.01, {1}).validate(2), ValidationError);
    CHECK_THROWS_AS(Specification::reach(0.5, {}).validate(2), ValidationError);
    CHECK_THROWS_AS(Specification::reach(0.5, {2}).validate(2), ValidationError);
    CHECK_THROWS_AS(Specification::cost(-1.0, {0}).validate(2), ValidationError);
}
