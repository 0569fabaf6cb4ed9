#include "oracles.hpp"

#include "rpomdp/benchmarks.hpp"
#include "rpomdp/ccp.hpp"
#include "rpomdp/errors.hpp"
#include "rpomdp/program.hpp"

#include <doctest.h>

#include <random>

using namespace rpomdp;

namespace {

double bilinear(BilinearRole role, double d, double y, double z) {
    return (role == BilinearRole::Reach ? -2.0 : 2.0) * d * y * z;
}

// State 0 chooses between a risky action (0) and a slow one (1).
IntervalPomdp choice_model(Interval risky_hit, Interval risky_miss, Interval slow_hit,
                           Interval slow_stay) {
    PomdpData d;
    d.num_states = 3;
    d.num_actions = 2;
    d.num_observations = 3;
    d.transitions = {{{{1, risky_hit}, {2, risky_miss}}, {{0, slow_stay}, {1, slow_hit}}},
                     {{{1, {1.0, 1.0}}}, {{1, {1.0, 1.0}}}},
                     {{{2, {1.0, 1.0}}}, {{2, {1.0, 1.0}}}}};
    d.costs = {{1.0, 1.0}, {0.0, 0.0}, {0.0, 0.0}};
    d.observation = {0, 1, 2};
    d.targets = {1};
    return IntervalPomdp(std::move(d));
}

// Exact reachability of the choice model with point intervals when the
// risky action has probability w.
double choice_reach(double hit, double slow_hit, double w) {
    // p = w * hit + (1 - w) * (slow_hit + (1 - slow_hit) * p)
    return (w * hit + (1.0 - w) * slow_hit) / (1.0 - (1.0 - w) * (1.0 - slow_hit));
}

LinearizationPoint point_for(const SemiInfiniteProgram& program, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    LinearizationPoint pt;
    pt.sigma.assign(program.num_observations, std::vector<double>(program.num_actions));
    for (auto& row : pt.sigma) {
        double sum = 0.0;
        for (double& v : row)
            sum += v = u(rng);
        for (double& v : row)
            v /= sum;
    }
    pt.values.assign(program.families.size(), std::vector<double>(program.num_states));
    for (auto& fam : pt.values)
        for (double& v : fam)
            v = u(rng);
    return pt;
}

std::vector<double> solve_point(const InstantiatedProgram& inst, SolveReport* report = nullptr) {
    const auto conic = qcqp_to_conic(inst.qcqp);
    auto r = solve(conic);
    REQUIRE((r.status == SolveStatus::Optimal || r.status == SolveStatus::NumericalFailure));
    std::vector<double> x(r.x.data(), r.x.data() + conic.num_source_variables);
    if (report)
        *report = std::move(r);
    return x;
}

double penalty_sum(const InstantiatedProgram& inst, const std::vector<double>& x) {
    double sum = 0.0;
    for (VarId k : inst.penalty_vars)
        sum += x[k];
    return sum;
}

} // namespace

TEST_CASE("convexified bilinear terms") {
    SUBCASE("reach tangency") {
        const auto c = convexify_bilinear(0.25, BilinearRole::Reach, 0.8, 0.1);
        // -d (y_hat + z_hat)^2 = -0.25 * 0.81
        CHECK(c.concave_part(0.8, 0.1) == doctest::Approx(-0.2025));
        CHECK(c.replacement(0.8, 0.1) == doctest::Approx(-0.2025));
        CHECK(c.convex_part(0.8, 0.1) + c.replacement(0.8, 0.1) ==
              doctest::Approx(bilinear(BilinearRole::Reach, 0.25, 0.8, 0.1)));
    }
    SUBCASE("cost tangency") {
        const auto c = convexify_bilinear(0.5, BilinearRole::Cost, 0.3, 2.0);
        CHECK(c.replacement(0.3, 2.0) == doctest::Approx(-0.5 * (0.09 + 4.0)));
        CHECK(c.convex_part(0.3, 2.0) + c.replacement(0.3, 2.0) == doctest::Approx(0.6));
    }
    SUBCASE("replacement dominates away from the point") {
        const auto c = convexify_bilinear(0.25, BilinearRole::Reach, 0.8, 0.1);
        for (double y = 0.0; y <= 1.0; y += 0.05)
            for (double z = 0.0; z <= 1.0; z += 0.05) {
                CHECK(c.replacement(y, z) >= c.concave_part(y, z) - 1e-15);
                CHECK(c.convex_part(y, z) + c.replacement(y, z) >=
                      bilinear(BilinearRole::Reach, 0.25, y, z) - 1e-15);
            }
    }
    SUBCASE("contract") {
        CHECK_THROWS_AS(convexify_bilinear(0.0, BilinearRole::Reach, 0.1, 0.1), ContractViolation);
        CHECK_THROWS_AS(convexify_bilinear(0.1, BilinearRole::Cost, INFINITY, 0.1),
                        ContractViolation);
    }
}

TEST_CASE("convexification is a sound upper bound") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto role = trial % 2 ? BilinearRole::Cost : BilinearRole::Reach;
        const double scale = role == BilinearRole::Cost ? 20.0 : 1.0;
        const double d = 0.5 * u(rng) + 1e-3;
        const double yh = u(rng), zh = scale * u(rng);
        const double y = u(rng), z = scale * u(rng);
        const auto c = convexify_bilinear(d, role, yh, zh);
        const double exact = bilinear(role, d, y, z);
        CHECK(c.convex_part(y, z) + c.replacement(y, z) >= exact - 1e-12 * scale * scale);
        CHECK(std::abs(c.convex_part(yh, zh) + c.replacement(yh, zh) - bilinear(role, d, yh, zh)) <=
              1e-12 * scale * scale);
    }
}

TEST_CASE("robust constraint counts") {
    const std::vector<Specification> reach{Specification::reach(0.1, {1})};
    SUBCASE("one action with two vertices") {
        PomdpData d;
        d.num_states = 3;
        d.num_actions = 1;
        d.num_observations = 1;
        d.transitions = {{{{1, {0.3, 0.7}}, {2, {0.3, 0.7}}}}, {{{1, {1.0, 1.0}}}}, {{{2, {1.0, 1.0}}}}};
        d.costs = {{0.0}, {0.0}, {0.0}};
        d.observation = {0, 0, 0};
        d.targets = {1};
        const IntervalPomdp model(d);
        const auto prog = build_program(model, reach);
        CHECK(count_robust_constraints(prog, enumerate_model_vertices(model)) == 2);
    }
    SUBCASE("two actions with two and three vertices") {
        PomdpData d;
        d.num_states = 4;
        d.num_actions = 2;
        d.num_observations = 1;
        d.transitions = {{{{1, {0.3, 0.7}}, {2, {0.3, 0.7}}},
                          {{1, {0.1, 0.5}}, {2, {0.1, 0.5}}, {3, {0.1, 0.5}}}},
                         {{{1, {1.0, 1.0}}}, {{1, {1.0, 1.0}}}},
                         {{{2, {1.0, 1.0}}}, {{2, {1.0, 1.0}}}},
                         {{{3, {1.0, 1.0}}}, {{3, {1.0, 1.0}}}}};
        d.costs.assign(4, {0.0, 0.0});
        d.observation = {0, 0, 0, 0};
        d.targets = {1};
        const IntervalPomdp model(d);
        const auto vt = enumerate_model_vertices(model);
        CHECK(vt.vertices[0][1].size() == 6);
        CHECK(count_robust_constraints(build_program(model, reach), vt) == 2 * 6);
    }
    SUBCASE("point intervals give one constraint per free state") {
        const auto model = gen_grid({0.98, 0.98});
        const auto prog = build_program(model, {Specification::reach(0.5, model.targets())});
        std::size_t free = 0;
        for (auto role : prog.families[0].role)
            free += role == StateRole::Free;
        CHECK(count_robust_constraints(prog, enumerate_model_vertices(model)) == free);
    }
}

TEST_CASE("program structure") {
    const auto model = choice_model({0.6, 0.6}, {0.4, 0.4}, {0.3, 0.3}, {0.7, 0.7});
    const auto reach_only = build_program(model, {Specification::reach(0.5, {1})});
    CHECK(reach_only.families.size() == 1);
    CHECK(reach_only.families[0].reach);
    for (const auto& name : reach_only.names)
        CHECK(name[0] != 'c');
    CHECK(reach_only.families[0].role[1] == StateRole::Fixed);
    CHECK(reach_only.families[0].fixed_value[1] == 1.0);
    CHECK(reach_only.families[0].role[2] == StateRole::Fixed);
    CHECK(reach_only.families[0].fixed_value[2] == 0.0);

    CHECK_THROWS_AS(build_program(model, {Specification::cost(5.0, {1})}), InfiniteCostError);
    CHECK_THROWS_AS(build_program(model, {}), ValidationError);
    CHECK_THROWS_AS(build_program(model, {Specification::reach(0.5, {1})}, 0.6), ValidationError);
}

TEST_CASE("nominal models need fewer constraints") {
    const auto nominal = gen_grid({0.98, 0.98});
    const auto wide = gen_grid({0.95, 0.98});
    const std::vector<Specification> spec{Specification::reach(0.84, nominal.targets())};
    const auto a = count_robust_constraints(build_program(nominal, spec),
                                            enumerate_model_vertices(nominal));
    const auto b = count_robust_constraints(build_program(wide, spec),
                                            enumerate_model_vertices(wide));
    CHECK(a < b);
}

TEST_CASE("penalties shrink as tau grows") {
    const auto model = gen_grid({0.98, 0.98});
    const std::vector<Specification> spec{Specification::reach(0.99, model.targets())};
    const auto prog = build_program(model, spec);
    const auto vt = enumerate_model_vertices(model);
    std::mt19937_64 rng(2);
    const auto pt = point_for(prog, rng);
    double last_penalty = INFINITY, last_objective = -INFINITY;
    for (double tau : {0.5, 2.0, 8.0, 32.0}) {
        const auto inst = instantiate_robust(prog, model, vt, pt, tau);
        SolveReport r;
        const auto x = solve_point(inst, &r);
        const double pen = penalty_sum(inst, x);
        CHECK(pen <= last_penalty + 1e-5);
        CHECK(r.objective >= last_objective - 1e-5);
        last_penalty = pen;
        last_objective = r.objective;
    }
}

TEST_CASE("zero-penalty solutions are robust lower bounds") {
    // On point-interval models the induced chain is exact, so a solution
    // with no penalty certifies its own p at the initial state. Linearising
    // at a policy and its exact values keeps zero penalties feasible.
    std::mt19937_64 rng(37);
    const auto model = gen_grid({0.98, 0.98});
    const std::vector<Specification> spec{Specification::reach(0.0, model.targets())};
    const auto prog = build_program(model, spec);
    const auto vt = enumerate_model_vertices(model);
    int checked = 0;
    for (int trial = 0; trial < 10; ++trial) {
        auto pt = point_for(prog, rng);
        pt.values[0] = robust_reach(induce_chain(model, Policy(pt.sigma)), model.targets()).reach;
        const auto inst = instantiate_robust(prog, model, vt, pt, 1e4);
        const auto x = solve_point(inst);
        if (penalty_sum(inst, x) > 1e-7)
            continue;
        ++checked;
        std::vector<std::vector<double>> raw(prog.num_observations,
                                             std::vector<double>(prog.num_actions));
        for (ObsId z = 0; z < prog.num_observations; ++z)
            for (ActionId a = 0; a < prog.num_actions; ++a)
                raw[z][a] = x[prog.sigma_var[z][a]];
        const Policy policy(project_policy(raw, prog.eps_graph));
        const auto v = robust_reach(induce_chain(model, policy), model.targets());
        CHECK(v.reach[model.initial()] >= x[prog.families[0].var[model.initial()]] - 1e-5);
    }
    CHECK(checked > 0);
}

TEST_CASE("project_policy") {
    const auto p = project_policy({{1.0, 0.0, 0.0}, {0.2, 0.3, 0.5}}, 1e-4);
    for (const auto& row : p) {
        double sum = 0.0;
        for (double v : row) {
            CHECK(v >= 1e-4);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(p[1][2] == doctest::Approx(0.5));
    CHECK(p[0][0] > 0.999);
}

TEST_CASE("single action models certify the only policy") {
    PomdpData d;
    d.num_states = 3;
    d.num_actions = 1;
    d.num_observations = 1;
    d.transitions = {{{{1, {0.6, 0.8}}, {2, {0.2, 0.4}}}}, {{{1, {1.0, 1.0}}}}, {{{2, {1.0, 1.0}}}}};
    d.costs = {{0.0}, {0.0}, {0.0}};
    d.observation = {0, 0, 0};
    d.targets = {1};
    const IntervalPomdp model(d);
    const auto ok = run_ccp(model, {Specification::reach(0.6, {1})});
    CHECK(ok.status == SynthesisStatus::Certified);
    CHECK(ok.policy.table() == std::vector<std::vector<double>>{{1.0}});
    CcpParams params;
    params.max_restarts = 0;
    params.max_iterations = 5;
    CHECK(run_ccp(model, {Specification::reach(0.61, {1})}, params).status ==
          SynthesisStatus::Infeasible);
}

TEST_CASE("small MDP reaches the enumerated optimum") {
    const double hit = 0.6, slow_hit = 0.3;
    const auto model = choice_model({hit, hit}, {1 - hit, 1 - hit}, {slow_hit, slow_hit},
                                    {1 - slow_hit, 1 - slow_hit});
    const double eps = 1e-4;
    double best = 0.0;
    for (double w : {eps, 1.0 - eps})
        best = std::max(best, choice_reach(hit, slow_hit, w));
    const auto r = run_ccp(model, {Specification::reach(best - 1e-4, {1})});
    REQUIRE(r.status == SynthesisStatus::Certified);
    CHECK(r.verification.initial_values[0] >= best - 1e-4);
    CHECK(r.verification.initial_values[0] <= best + 1e-9);
}

TEST_CASE("grid at 0.84 is certified and re-verifies") {
    const auto model = gen_grid({0.98, 0.98});
    const std::vector<Specification> spec{Specification::reach(0.84, model.targets())};
    const auto r = run_ccp(model, spec);
    REQUIRE(r.status == SynthesisStatus::Certified);
    CHECK(r.robust_constraint_count == 14);
    const auto again = check(induce_chain(model, r.policy), spec);
    CHECK(again.satisfied);
    CHECK(again.initial_values[0] == doctest::Approx(r.verification.initial_values[0]));

    // The same policy on a widened model can only do worse.
    const auto wide = gen_grid({0.95, 0.98});
    CHECK(check(induce_chain(wide, r.policy), spec).initial_values[0] <=
          again.initial_values[0] + 1e-9);
}
