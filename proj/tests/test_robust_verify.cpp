#include "oracles.hpp"

#include "rpomdp/errors.hpp"
#include "rpomdp/robust_verify.hpp"

#include <doctest.h>

#include <random>

using namespace rpomdp;

namespace {

// 0 -> {1: target, 2: sink} with the given intervals.
IntervalMarkovChain split_chain(Interval to_target, Interval to_sink) {
    return IntervalMarkovChain(0,
                               {{{1, to_target}, {2, to_sink}},
                                {{1, {1.0, 1.0}}},
                                {{2, {1.0, 1.0}}}},
                               {0.0, 0.0, 0.0});
}

std::vector<StateId> last_state(const IntervalMarkovChain& chain) {
    return {chain.num_states() - 1};
}

} // namespace

TEST_CASE("one step reachability takes the lower bound") {
    const auto chain = split_chain({0.3, 0.7}, {0.3, 0.7});
    const auto v = robust_reach(chain, {1});
    CHECK(v.converged);
    CHECK(v.reach[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(v.reach[1] == 1.0);
    CHECK(v.reach[2] == 0.0);
}

TEST_CASE("two step reachability multiplies worst cases") {
    // 0 -> 1 in [0.4, 0.6], 1 -> target in [0.5, 0.7].
    const IntervalMarkovChain chain(0,
                                    {{{1, {0.4, 0.6}}, {3, {0.4, 0.6}}},
                                     {{2, {0.5, 0.7}}, {3, {0.3, 0.5}}},
                                     {{2, {1.0, 1.0}}},
                                     {{3, {1.0, 1.0}}}},
                                    {0.0, 0.0, 0.0, 0.0});
    CHECK(robust_reach(chain, {2}).reach[0] == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("expected cost examples") {
    SUBCASE("single step") {
        const IntervalMarkovChain chain(0, {{{1, {1.0, 1.0}}}, {{1, {1.0, 1.0}}}}, {3.0, 0.0});
        CHECK(robust_cost(chain, {1}).cost[0] == doctest::Approx(3.0));
    }
    SUBCASE("self loop maximised") {
        // Staying with probability up to 0.5 at cost 1 per step: 1 / 0.5.
        const IntervalMarkovChain chain(0, {{{0, {0.2, 0.5}}, {1, {0.5, 0.8}}}, {{1, {1.0, 1.0}}}},
                                        {1.0, 0.0});
        const auto v = robust_cost(chain, {1});
        CHECK(v.converged);
        CHECK(v.cost[0] == doctest::Approx(2.0).epsilon(1e-7));
    }
}

TEST_CASE("point chains match an exact linear solve") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 60; ++trial) {
        const auto chain = oracle::random_chain(6 + trial % 5, 3, rng, true, true);
        const auto P = oracle::point_matrix(chain);
        const auto targets = last_state(chain);
        const auto exact = oracle::exact_reach(P, targets);
        const auto v = robust_reach(chain, targets);
        for (std::size_t s = 0; s < chain.num_states(); ++s)
            CHECK(std::abs(v.reach[s] - exact[s]) <= 1e-7);

        std::vector<double> costs(chain.num_states());
        for (StateId s = 0; s < chain.num_states(); ++s)
            costs[s] = chain.cost(s);
        const auto exact_cost = oracle::exact_cost(P, costs, targets);
        if (std::isinf(exact_cost[0])) {
            CHECK_THROWS_AS(robust_cost(chain, targets), InfiniteCostError);
            continue;
        }
        const auto c = robust_cost(chain, targets);
        for (std::size_t s = 0; s < chain.num_states(); ++s) {
            if (std::isinf(exact_cost[s]))
                CHECK(std::isinf(c.cost[s]));
            else
                CHECK(std::abs(c.cost[s] - exact_cost[s]) <= 1e-7 * std::max(1.0, exact_cost[s]));
        }
    }
}

TEST_CASE("interval chains agree with the vertex adversary oracle") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 40; ++trial) {
        const auto chain = oracle::random_chain(5, 3, rng, false, false);
        const auto targets = last_state(chain);
        const auto r = robust_reach(chain, targets);
        CHECK(r.reach[0] == doctest::Approx(vertex_adversary_oracle(
                                                chain, Specification::reach(0.0, targets)))
                                .epsilon(1e-6));
        double c = INFINITY, co = INFINITY;
        try {
            c = robust_cost(chain, targets).cost[0];
        } catch (const InfiniteCostError&) {
        }
        try {
            co = vertex_adversary_oracle(chain, Specification::cost(0.0, targets));
        } catch (const InfiniteCostError&) {
        }
        REQUIRE(std::isinf(c) == std::isinf(co));
        if (std::isfinite(c))
            CHECK(c == doctest::Approx(co).epsilon(1e-6));
    }
}

TEST_CASE("greedy inner step equals the best vertex") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial % 5);
        const auto iv = oracle::random_intervals(n, rng, 0.1);
        SuccessorList succ;
        std::vector<double> lo, hi, values(n);
        for (std::size_t i = 0; i < n; ++i) {
            succ.push_back({i, iv[i]});
            lo.push_back(iv[i].lower);
            hi.push_back(iv[i].upper);
            values[i] = u(rng);
        }
        double best_min = INFINITY, best_max = -INFINITY;
        for (const auto& x : oracle::bound_assignment_vertices(lo, hi)) {
            double e = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                e += x[i] * values[i];
            best_min = std::min(best_min, e);
            best_max = std::max(best_max, e);
        }
        std::vector<double> dist;
        const double got = worst_case_expectation(succ, values, Nature::Minimize, dist);
        CHECK(std::abs(got - best_min) <= 1e-10);
        CHECK(std::abs(worst_case_expectation(succ, values, Nature::Maximize) - best_max) <= 1e-10);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(dist[i] >= iv[i].lower - 1e-15);
            CHECK(dist[i] <= iv[i].upper + 1e-15);
            sum += dist[i];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("value iterates are monotone") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const auto chain = oracle::random_chain(8, 3, rng, true, false);
        const auto targets = last_state(chain);
        std::vector<double> prev(chain.num_states(), 0.0);
        bool monotone = true;
        VerifySettings settings;
        settings.observer = [&](std::size_t, std::span<const double> x) {
            for (std::size_t s = 0; s < x.size(); ++s)
                monotone = monotone && x[s] >= prev[s] - 1e-15;
            prev.assign(x.begin(), x.end());
        };
        robust_reach(chain, targets, settings);
        CHECK(monotone);
        prev.assign(chain.num_states(), 0.0);
        if (!oracle::reaches(oracle::point_matrix(chain), targets)[0])
            continue;
        try {
            robust_cost(chain, targets, settings);
        } catch (const InfiniteCostError&) {
        }
        CHECK(monotone);
    }
}

TEST_CASE("check against thresholds") {
    const auto chain = split_chain({0.3, 0.7}, {0.3, 0.7});
    CHECK(check(chain, {Specification::reach(0.0, {1})}).satisfied);
    CHECK(check(chain, {Specification::reach(0.3, {1})}).satisfied);
    const auto r = check(chain, {Specification::reach(0.4, {1})});
    CHECK_FALSE(r.satisfied);
    CHECK(r.initial_values[0] == doctest::Approx(0.3));
}

TEST_CASE("errors") {
    const auto chain = split_chain({0.3, 0.7}, {0.3, 0.7});
    CHECK_THROWS_AS(robust_cost(chain, {1}), InfiniteCostError);

    const IntervalMarkovChain slow(0, {{{0, {0.999, 0.999}}, {1, {0.001, 0.001}}}, {{1, {1.0, 1.0}}}},
                                   {1.0, 0.0});
    VerifySettings settings;
    settings.max_iterations = 10;
    CHECK_THROWS_AS(robust_cost(slow, {1}, settings), ConvergenceError);
    settings.throw_on_cap = false;
    const auto v = robust_cost(slow, {1}, settings);
    CHECK_FALSE(v.converged);
    CHECK_FALSE(check(slow, {Specification::cost(1e9, {1})}, settings).satisfied);
}
