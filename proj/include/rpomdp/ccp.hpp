#pragma once

// Penalty convex-concave procedure with robust verification after every
// convex solve.

#include "rpomdp/conic.hpp"
#include "rpomdp/model.hpp"
#include "rpomdp/program.hpp"
#include "rpomdp/robust_verify.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rpomdp {

struct IterationRecord {
    std::size_t restart = 0;
    std::size_t iteration = 0;
    double tau = 0.0;
    SolveStatus solve_status = SolveStatus::Optimal;
    /// f + tau * sum(penalties) at the solver's point.
    double objective = 0.0;
    double penalty_sum = 0.0;
    std::size_t solver_iterations = 0;
    double solve_seconds = 0.0;
    double verify_seconds = 0.0;
    /// Verified robust value at the initial state, per specification.
    std::vector<double> initial_values;
    bool satisfied = false;
};

struct CcpParams {
    double tau0 = 1.0;
    /// Additive increment: tau <- min(tau + mu, tau_max).
    double mu = 2.0;
    double tau_max = 1e6;
    double penalty_tolerance = 1e-6;
    std::size_t max_iterations = 500;
    /// Restarts after the initial run.
    std::size_t max_restarts = 5;
    double stagnation_tolerance = 1e-8;
    std::size_t stagnation_window = 10;
    /// Halvings tried when a step verifies worse than the current point.
    std::size_t max_backtracks = 6;
    double eps_graph = 1e-4;
    std::uint64_t seed = 0;
    /// Wall-clock limit for the whole synthesis; 0 disables it.
    double timeout_seconds = 0.0;
    ObjectiveChoice objective = ObjectiveChoice::Auto;
    std::size_t vertex_budget = kDefaultVertexBudget;
    std::size_t max_constraints = 5'000'000;
    SolverSettings solver;
    VerifySettings verify;
    /// Called after every convex solve and its verification.
    std::function<void(const IterationRecord&)> on_iteration;

    /// Throws ValidationError for out-of-range parameters.
    void validate() const;
};

struct CcpState {
    /// sigma_hat[z][a]
    std::vector<std::vector<double>> sigma_hat;
    /// Linearisation values per value family (p_hat or c_hat), per state.
    std::vector<std::vector<double>> value_hat;
    double tau = 1.0;
    double mu = 2.0;
    double tau_max = 1e6;
    std::size_t iteration = 0;
    std::size_t restarts = 0;
};


enum class SynthesisStatus { Certified, Infeasible, Timeout };

const char* to_string(SynthesisStatus status);

struct SynthesisResult {
    SynthesisStatus status = SynthesisStatus::Infeasible;
    /// Certified policy, or the best policy found otherwise.
    Policy policy;
    /// Fresh robust verification of `policy`.
    CheckResult verification;
    /// Convex solves per run (initial run first).
    std::vector<std::size_t> iterations_per_restart;
    std::vector<IterationRecord> trace;
    std::size_t robust_constraint_count = 0;
    std::size_t qcqp_variables = 0;
    std::size_t qcqp_constraints = 0;
    std::size_t total_vertices = 0;
    std::size_t max_vertices = 0;
    double build_seconds = 0.0;
    double total_seconds = 0.0;
    std::string message;

    std::size_t total_iterations() const;
};

/// Clamps every entry to at least eps and renormalises each row so that it
/// sums to one while keeping all entries >= eps.
std::vector<std::vector<double>> project_policy(std::vector<std::vector<double>> raw, double eps);

/// Runs the procedure. A Certified result always carries a policy whose fresh
/// robust verification satisfies every specification. Solver failures throw
/// SolverError with the restart and iteration in the message.
SynthesisResult run_ccp(const IntervalPomdp& model, const std::vector<Specification>& specs,
                        const CcpParams& params = {});

} // namespace rpomdp
