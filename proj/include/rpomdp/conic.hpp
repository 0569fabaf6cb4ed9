#pragma once

// Conic form of the per-iteration QCQP and a primal-dual interior-point
// solver for linear + second-order cone programs:
//
//   minimize    c^T x
//   subject to  A x = b
//               h - G x in K = R_+^l x Q^{q_1} x ... x Q^{q_k}
//
// where Q^q = {u in R^q : u_0 >= ||u_{1:}||}.

#include "rpomdp/qcqp.hpp"

#include <Eigen/Sparse>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace rpomdp {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct ConicProblem {
    std::size_t num_variables = 0;
    /// Leading variables that correspond to the source QCQP variables; the
    /// rest are epigraph auxiliaries.
    std::size_t num_source_variables = 0;
    Eigen::VectorXd c;
    double objective_offset = 0.0;
    SparseMatrix A;
    Eigen::VectorXd b;
    SparseMatrix G;
    Eigen::VectorXd h;
    std::size_t num_nonnegative = 0;
    std::vector<std::size_t> cone_sizes;

    std::size_t num_cone_rows() const;
    /// Throws ContractViolation on inconsistent dimensions.
    void validate() const;
};

/// Epigraph reformulation. Every distinct atom expression q gets one
/// auxiliary t >= q^2 (a rotated cone written as ||(2q, t-1)|| <= t+1);
/// each constraint then reads sum(coef_i * t_i) + a^T x + b <= 0. Throws
/// ConvexityError for a nonpositive atom coefficient.
ConicProblem qcqp_to_conic(const ConvexQcqp& problem);

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(SolveStatus status);

struct SolverSettings {
    double feasibility_tolerance = 1e-8;
    double absolute_gap_tolerance = 1e-8;
    double relative_gap_tolerance = 1e-8;
    std::size_t max_iterations = 200;
    double timeout_seconds = 300.0;
    bool equilibrate = true;
    std::size_t equilibration_passes = 15;
    double regularization = 1e-9;
    std::size_t refinement_steps = 8;

    /// Defaults, with the timeout taken from RPOMDP_SOLVER_TIMEOUT when set.
    static SolverSettings from_environment();
};

struct SolveReport {
    SolveStatus status = SolveStatus::NumericalFailure;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    Eigen::VectorXd z;
    Eigen::VectorXd s;
    double objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    std::size_t iterations = 0;
    double wall_time = 0.0;
    bool timed_out = false;
    std::string message;
};

SolveReport solve(const ConicProblem& problem, const SolverSettings& settings = {});

/// Conic Benchmark Format (CBF version 3) text for the problem. Variables are
/// free; constraint rows are Ax - b in L= followed by h - Gx in L+ and Q.
std::string write_cbf(const ConicProblem& problem);
ConicProblem read_cbf(std::string_view text);

} // namespace rpomdp
