#include "rpomdp/ccp.hpp"

#include "rpomdp/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace rpomdp {

void CcpParams::validate() const {
    if (!(tau0 > 0.0) || !(mu >= 0.0) || !(tau_max >= tau0))
        throw ValidationError("penalty schedule requires tau0 > 0, mu >= 0 and tau_max >= tau0");
    if (!(penalty_tolerance >= 0.0))
        throw ValidationError("penalty tolerance must be nonnegative");
    if (max_iterations == 0)
        throw ValidationError("iteration cap must be positive");
    if (!(eps_graph > 0.0) || eps_graph >= 1.0)
        throw ValidationError("eps_graph must lie in (0, 1)");
    if (!(timeout_seconds >= 0.0))
        throw ValidationError("timeout must be nonnegative");
}

const char* to_string(SynthesisStatus status) {
    switch (status) {
    case SynthesisStatus::Certified:
        return "certified";
    case SynthesisStatus::Infeasible:
        return "infeasible";
    case SynthesisStatus::Timeout:
        return "timeout";
    }
    return "unknown";
}

std::size_t SynthesisResult::total_iterations() const {
    std::size_t n = 0;
    for (std::size_t k : iterations_per_restart)
        n += k;
    return n;
}

std::vector<std::vector<double>> project_policy(std::vector<std::vector<double>> raw, double eps) {
    for (auto& row : raw) {
        const double n = static_cast<double>(row.size());
        if (eps * n > 1.0)
            throw ContractViolation("eps_graph too large for the number of actions");
        double sum = 0.0;
        for (double& v : row) {
            if (!std::isfinite(v) || v < eps)
                v = eps;
            sum += v;
        }
        // Shrink the mass above eps so the row sums to one.
        const double excess = sum - eps * n;
        const double target = 1.0 - eps * n;
        for (double& v : row)
            v = excess > 0.0 ? eps + (v - eps) * (target / excess) : 1.0 / n;
    }
    return raw;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// How far a verification result is from satisfying the specifications;
// zero when satisfied.
double shortfall(const CheckResult& check, const std::vector<Specification>& specs) {
    double total = 0.0;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const double v = check.initial_values[i];
        if (specs[i].is_reach())
            total += std::max(0.0, specs[i].threshold - v);
        else if (std::isinf(v) || !check.values[i].converged)
            total += std::numeric_limits<double>::max();
        else
            total += std::max(0.0, (v - specs[i].threshold) / std::max(1.0, specs[i].threshold));
    }
    return total;
}

std::vector<std::vector<double>> family_values(const SemiInfiniteProgram& program,
                                               const CheckResult& check) {
    std::vector<std::vector<double>> out;
    out.reserve(program.families.size());
    for (const auto& fam : program.families) {
        const auto& rv = check.values[fam.spec_index];
        std::vector<double> v = fam.reach ? rv.reach : rv.cost;
        for (double& x : v)
            if (!std::isfinite(x))
                x = 0.0;
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<std::vector<double>> random_policy(std::size_t num_obs, std::size_t num_actions,
                                               double eps, std::mt19937_64& rng) {
    std::gamma_distribution<double> gamma(1.0, 1.0);
    std::vector<std::vector<double>> p(num_obs, std::vector<double>(num_actions));
    for (auto& row : p) {
        double sum = 0.0;
        for (double& v : row) {
            v = gamma(rng);
            sum += v;
        }
        for (double& v : row)
            v = sum > 0.0 ? v / sum : 1.0 / static_cast<double>(num_actions);
    }
    return project_policy(std::move(p), eps);
}

} // namespace

SynthesisResult run_ccp(const IntervalPomdp& model, const std::vector<Specification>& specs,
                        const CcpParams& params) {
    params.validate();
    const auto start = Clock::now();
    SynthesisResult result;

    const SemiInfiniteProgram program =
        build_program(model, specs, params.eps_graph, params.objective);
    const VertexTable vertices = enumerate_model_vertices(model, params.vertex_budget);
    result.robust_constraint_count = count_robust_constraints(program, vertices);
    result.total_vertices = vertices.total_vertices;
    result.max_vertices = vertices.max_vertices;
    if (result.robust_constraint_count > params.max_constraints)
        throw VertexBudgetError("instantiation would create " +
                                std::to_string(result.robust_constraint_count) +
                                " robust constraints (limit " +
                                std::to_string(params.max_constraints) + ")");
    result.build_seconds = seconds_since(start);

    // Intermediate policies can be arbitrarily slow to evaluate; an
    // unconverged evaluation simply does not certify.
    VerifySettings verify = params.verify;
    verify.throw_on_cap = false;

    std::mt19937_64 rng(params.seed);
    double best_shortfall = std::numeric_limits<double>::infinity();

    auto out_of_time = [&] {
        return params.timeout_seconds > 0.0 && seconds_since(start) >= params.timeout_seconds;
    };
    auto finish = [&](SynthesisStatus status, std::string message) {
        result.status = status;
        result.message = std::move(message);
        result.total_seconds = seconds_since(start);
        return result;
    };
    // Verifies a policy from scratch and tracks the best one seen.
    auto evaluate = [&](const Policy& policy) {
        CheckResult check = rpomdp::check(induce_chain(model, policy), specs, verify);
        const double gap = check.satisfied ? 0.0 : shortfall(check, specs);
        if (check.satisfied || gap < best_shortfall || result.policy.num_observations() == 0) {
            best_shortfall = gap;
            result.policy = policy;
            result.verification = check;
        }
        return check;
    };

    CcpState state;
    state.mu = params.mu;
    state.tau_max = params.tau_max;
    for (state.restarts = 0; state.restarts <= params.max_restarts; ++state.restarts) {
        if (out_of_time())
            return finish(SynthesisStatus::Timeout, "time limit reached");
        state.sigma_hat = state.restarts == 0
                              ? Policy::uniform(model.num_observations(), model.num_actions()).table()
                              : random_policy(model.num_observations(), model.num_actions(),
                                              params.eps_graph, rng);
        state.tau = params.tau0;
        state.iteration = 0;
        result.iterations_per_restart.push_back(0);

        const CheckResult initial = evaluate(Policy(state.sigma_hat));
        if (initial.satisfied)
            return finish(SynthesisStatus::Certified, "initial policy satisfies the specifications");
        state.value_hat = family_values(program, initial);
        double point_gap = shortfall(initial, specs);
        double point_objective =
            initial.initial_values[program.families[program.objective_family].spec_index];

        std::vector<double> history;
        while (state.iteration < params.max_iterations) {
            if (out_of_time())
                return finish(SynthesisStatus::Timeout, "time limit reached");
            ++state.iteration;
            ++result.iterations_per_restart.back();

            const LinearizationPoint point{state.sigma_hat, state.value_hat};
            const InstantiatedProgram inst = instantiate_robust(
                program, model, vertices, point, state.tau, params.max_constraints);
            result.qcqp_variables = inst.qcqp.num_variables;
            result.qcqp_constraints = inst.qcqp.equalities.size() + inst.qcqp.inequalities.size();

            SolverSettings solver = params.solver;
            if (params.timeout_seconds > 0.0)
                solver.timeout_seconds = std::min(
                    solver.timeout_seconds,
                    std::max(1e-3, params.timeout_seconds - seconds_since(start)));
            const auto solve_start = Clock::now();
            const SolveReport report = solve(qcqp_to_conic(inst.qcqp), solver);

            IterationRecord rec;
            rec.restart = state.restarts;
            rec.iteration = state.iteration;
            rec.tau = state.tau;
            rec.solve_status = report.status;
            rec.solver_iterations = report.iterations;
            rec.solve_seconds = seconds_since(solve_start);

            if (report.timed_out) {
                result.trace.push_back(rec);
                return finish(SynthesisStatus::Timeout, "solver time limit reached");
            }
            const bool usable = report.x.size() >= static_cast<Eigen::Index>(program.num_variables) &&
                                report.x.allFinite();
            if (report.status == SolveStatus::Infeasible ||
                report.status == SolveStatus::Unbounded || !usable)
                throw SolverError("convex subproblem at restart " + std::to_string(state.restarts) +
                                  ", iteration " + std::to_string(state.iteration) + ": " +
                                  to_string(report.status) +
                                  (report.message.empty() ? "" : " (" + report.message + ")"));

            rec.objective = inst.qcqp.objective.eval(std::span<const double>(
                                report.x.data(), inst.qcqp.num_variables)) *
                            *std::max_element(inst.value_scale.begin(), inst.value_scale.end());
            for (std::size_t f = 0; f < inst.penalty.size(); ++f)
                for (VarId k : inst.penalty[f])
                    if (k != kNoVar)
                        rec.penalty_sum += inst.value_scale[f] *
                                           std::max(0.0, report.x[static_cast<Eigen::Index>(k)]);

            std::vector<std::vector<double>> raw(model.num_observations(),
                                                 std::vector<double>(model.num_actions()));
            for (ObsId z = 0; z < model.num_observations(); ++z)
                for (ActionId a = 0; a < model.num_actions(); ++a)
                    raw[z][a] = report.x[static_cast<Eigen::Index>(program.sigma_var[z][a])];
            Policy policy(project_policy(std::move(raw), params.eps_graph));

            // A step that verifies worse than the current point is halved
            // toward it; when no shortened step helps, the point is kept and
            // only tau grows.
            const auto verify_start = Clock::now();
            CheckResult check = evaluate(policy);
            double gap = check.satisfied ? 0.0 : shortfall(check, specs);
            for (std::size_t h = 1; gap > point_gap && h <= params.max_backtracks; ++h) {
                const double t = std::ldexp(1.0, -static_cast<int>(h));
                auto blend = state.sigma_hat;
                for (ObsId z = 0; z < model.num_observations(); ++z)
                    for (ActionId a = 0; a < model.num_actions(); ++a)
                        blend[z][a] += t * (policy.table()[z][a] - blend[z][a]);
                Policy shorter(project_policy(std::move(blend), params.eps_graph));
                CheckResult shorter_check = evaluate(shorter);
                const double shorter_gap =
                    shorter_check.satisfied ? 0.0 : shortfall(shorter_check, specs);
                if (shorter_gap <= point_gap) {
                    policy = std::move(shorter);
                    check = std::move(shorter_check);
                    gap = shorter_gap;
                }
            }
            rec.verify_seconds = seconds_since(verify_start);
            rec.initial_values = check.initial_values;
            rec.satisfied = check.satisfied;
            result.trace.push_back(rec);
            if (params.on_iteration)
                params.on_iteration(rec);
            if (check.satisfied)
                return finish(SynthesisStatus::Certified, "policy verified");

            if (gap <= point_gap) {
                point_gap = gap;
                point_objective =
                    check.initial_values[program.families[program.objective_family].spec_index];
                state.sigma_hat = policy.table();
                state.value_hat = family_values(program, check);
            }
            state.tau = std::min(state.tau + state.mu, state.tau_max);

            history.push_back(point_objective);
            if (history.size() > params.stagnation_window) {
                const double recent = history.back();
                const double old = history[history.size() - 1 - params.stagnation_window];
                if (std::abs(recent - old) < params.stagnation_tolerance)
                    break;
            }
        }
    }
    return finish(SynthesisStatus::Infeasible,
                  "no certified policy after " + std::to_string(result.iterations_per_restart.size()) +
                      " runs");
}

} // namespace rpomdp
