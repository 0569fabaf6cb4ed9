#pragma once

// Robust synthesis program over policy, reachability and cost variables, its
// convexification around a linearisation point and the finite instantiation
// of the robust (for-all-distributions) constraints at polytope vertices.

#include "rpomdp/model.hpp"
#include "rpomdp/polytope.hpp"
#include "rpomdp/qcqp.hpp"

#include <cstddef>
#include <limits>
#include <vector>

namespace rpomdp {

inline constexpr VarId kNoVar = std::numeric_limits<VarId>::max();

enum class ObjectiveKind { MaximizeReach, MinimizeCost };

/// Role of a state inside one value family.
enum class StateRole {
    /// Robust Bellman constraints apply.
    Free,
    /// Value fixed by a boundary condition (target: 1, goal: 0, or a state
    /// that cannot reach the targets: 0).
    Fixed,
    /// Goal not reached almost surely; no variable, never referenced.
    Excluded,
};

/// Variables and roles of one specification (p_s for reachability, c_s for
/// expected cost).
struct ValueFamily {
    std::size_t spec_index = 0;
    bool reach = true;
    std::vector<VarId> var;
    std::vector<StateRole> role;
    std::vector<double> fixed_value;
};

/// The semi-infinite program. Policy variables are indexed by observation,
/// so states that share an observation share their policy variables.
struct SemiInfiniteProgram {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::size_t num_observations = 0;
    StateId initial = 0;
    std::vector<Specification> specs;
    std::vector<ValueFamily> families;
    /// sigma_var[z][a]
    std::vector<std::vector<VarId>> sigma_var;
    /// Family whose initial-state value the objective optimises.
    std::size_t objective_family = 0;
    ObjectiveKind objective = ObjectiveKind::MaximizeReach;
    double eps_graph = 1e-4;
    std::size_t num_variables = 0;
    std::vector<std::string> names;

    std::size_t value_variable_count() const;
    std::size_t policy_variable_count() const { return num_observations * num_actions; }
};

enum class ObjectiveChoice { Auto, Reach, Cost };

/// Builds the program. The objective follows the first specification unless
/// `objective` picks a family explicitly (the first spec of that kind).
/// Throws ValidationError for invalid specifications and InfiniteCostError
/// when a cost specification's goals are not reached almost surely from the
/// initial state.
SemiInfiniteProgram build_program(const IntervalPomdp& model,
                                  const std::vector<Specification>& specs,
                                  double eps_graph = 1e-4,
                                  ObjectiveChoice objective = ObjectiveChoice::Auto);

/// vertices[s][a]
struct VertexTable {
    std::vector<std::vector<VertexSet>> vertices;
    std::size_t total_vertices = 0;
    std::size_t max_vertices = 0;
};

VertexTable enumerate_model_vertices(const IntervalPomdp& model,
                                     std::size_t budget = kDefaultVertexBudget);

/// Number of robust Bellman constraints after instantiation: for every free
/// state of every family, the product over actions of the vertex counts.
std::size_t count_robust_constraints(const SemiInfiniteProgram& program,
                                     const VertexTable& vertices);

enum class BilinearRole { Reach, Cost };

/// Convex-concave split of one bilinear term 2*d*y*z (d = P/2, y a policy
/// variable, z a value variable) with the concave part replaced by its
/// tangent at (y_hat, z_hat).
///
/// Reach (term appears negated, -2dyz): convex d(y^2 + z^2), concave
/// -d(y+z)^2, replacement d(y_hat+z_hat)^2 - 2d(y_hat+z_hat)(y+z).
/// Cost (+2dyz): convex d(y+z)^2, concave -d(y^2+z^2), replacement
/// d(y_hat^2+z_hat^2) - 2d(y_hat*y + z_hat*z).
struct ConvexifiedBilinear {
    BilinearRole role = BilinearRole::Reach;
    double d = 0.0;
    double constant = 0.0;
    double coef_y = 0.0;
    double coef_z = 0.0;

    double convex_part(double y, double z) const;
    double concave_part(double y, double z) const;
    double replacement(double y, double z) const { return constant + coef_y * y + coef_z * z; }
};

/// Throws ContractViolation when d <= 0 or the point is not finite.
ConvexifiedBilinear convexify_bilinear(double d, BilinearRole role, double y_hat, double z_hat);

/// Point the concave parts are linearised at.
struct LinearizationPoint {
    /// sigma[z][a]
    std::vector<std::vector<double>> sigma;
    /// values[family][s]; entries of non-free states are ignored.
    std::vector<std::vector<double>> values;
};

struct InstantiatedProgram {
    ConvexQcqp qcqp;
    /// penalty[family][s] (k_s or l_s), kNoVar for non-free states.
    std::vector<std::vector<VarId>> penalty;
    std::vector<VarId> penalty_vars;
    std::size_t robust_constraint_count = 0;
    /// Value variables of family f (and their penalties) hold value / scale.
    /// Cost families use max(1, largest linearisation value) so that the
    /// squares stay well conditioned; reachability families use 1.
    std::vector<double> value_scale;
};

/// Convexifies the robust Bellman constraints at `point` and replaces each
/// for-all constraint of a state by one constraint per combination of
/// per-action polytope vertices. Adds one nonnegative penalty per free state
/// and family; the objective is f + tau * sum(penalties), both in scaled
/// units (see value_scale). Cost constraints are divided by their scale, so
/// each bilinear term is split as d * sigma * (c / scale).
InstantiatedProgram instantiate_robust(const SemiInfiniteProgram& program,
                                       const IntervalPomdp& model, const VertexTable& vertices,
                                       const LinearizationPoint& point, double tau,
                                       std::size_t max_constraints = 5'000'000);

} // namespace rpomdp
