#include "rpomdp/program.hpp"

#include "rpomdp/errors.hpp"
#include "rpomdp/robust_verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace rpomdp {

std::size_t SemiInfiniteProgram::value_variable_count() const {
    std::size_t count = 0;
    for (const auto& fam : families)
        for (VarId v : fam.var)
            count += v != kNoVar ? 1 : 0;
    return count;
}

namespace {

// Support graph of the model under any strictly positive policy.
IntervalMarkovChain support_chain(const IntervalPomdp& model) {
    return induce_chain(model, Policy::uniform(model.num_observations(), model.num_actions()));
}

} // namespace

SemiInfiniteProgram build_program(const IntervalPomdp& model,
                                  const std::vector<Specification>& specs, double eps_graph,
                                  ObjectiveChoice objective) {
    if (specs.empty())
        throw ValidationError("at least one specification is required");
    if (!(eps_graph > 0.0) || eps_graph * static_cast<double>(model.num_actions()) > 1.0)
        throw ValidationError("eps_graph must be positive and at most 1/|Act|");

    SemiInfiniteProgram prog;
    prog.num_states = model.num_states();
    prog.num_actions = model.num_actions();
    prog.num_observations = model.num_observations();
    prog.initial = model.initial();
    prog.specs = specs;
    prog.eps_graph = eps_graph;

    const auto chain = support_chain(model);
    const std::size_t n = model.num_states();
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& spec = specs[i];
        spec.validate(n);
        ValueFamily fam;
        fam.spec_index = i;
        fam.reach = spec.is_reach();
        fam.var.assign(n, kNoVar);
        fam.role.assign(n, StateRole::Free);
        fam.fixed_value.assign(n, 0.0);
        std::vector<bool> in_target(n, false);
        for (StateId s : spec.targets)
            in_target[s] = true;

        if (fam.reach) {
            const auto live = can_reach(chain, spec.targets);
            for (StateId s = 0; s < n; ++s) {
                if (in_target[s]) {
                    fam.role[s] = StateRole::Fixed;
                    fam.fixed_value[s] = 1.0;
                } else if (!live[s]) {
                    fam.role[s] = StateRole::Fixed;
                }
            }
        } else {
            const auto infinite = infinite_cost_states(chain, spec.targets);
            if (infinite[model.initial()])
                throw InfiniteCostError("goal set of specification " + spec.to_string() +
                                        " is not reached almost surely from the initial state");
            for (StateId s = 0; s < n; ++s) {
                if (in_target[s])
                    fam.role[s] = StateRole::Fixed;
                else if (infinite[s])
                    fam.role[s] = StateRole::Excluded;
            }
        }
        const std::string prefix = (fam.reach ? "p" : "c") + std::to_string(i) + "_";
        for (StateId s = 0; s < n; ++s) {
            if (fam.role[s] == StateRole::Excluded)
                continue;
            fam.var[s] = prog.num_variables++;
            prog.names.push_back(prefix + std::to_string(s));
        }
        prog.families.push_back(std::move(fam));
    }

    prog.sigma_var.assign(model.num_observations(), std::vector<VarId>(model.num_actions()));
    for (ObsId z = 0; z < model.num_observations(); ++z)
        for (ActionId a = 0; a < model.num_actions(); ++a) {
            prog.sigma_var[z][a] = prog.num_variables++;
            prog.names.push_back("sigma_" + std::to_string(z) + "_" + std::to_string(a));
        }

    std::size_t chosen = 0;
    if (objective != ObjectiveChoice::Auto) {
        const bool want_reach = objective == ObjectiveChoice::Reach;
        bool found = false;
        for (std::size_t i = 0; i < specs.size() && !found; ++i)
            if (specs[i].is_reach() == want_reach) {
                chosen = i;
                found = true;
            }
        if (!found)
            throw ValidationError(std::string("objective '") + (want_reach ? "reach" : "cost") +
                                  "' has no matching specification");
    }
    prog.objective_family = chosen;
    prog.objective =
        specs[chosen].is_reach() ? ObjectiveKind::MaximizeReach : ObjectiveKind::MinimizeCost;
    return prog;
}

VertexTable enumerate_model_vertices(const IntervalPomdp& model, std::size_t budget) {
    VertexTable table;
    table.vertices.resize(model.num_states());
    for (StateId s = 0; s < model.num_states(); ++s) {
        table.vertices[s].reserve(model.num_actions());
        for (ActionId a = 0; a < model.num_actions(); ++a) {
            std::vector<double> lo;
            std::vector<double> hi;
            for (const auto& succ : model.successors(s, a)) {
                lo.push_back(succ.prob.lower);
                hi.push_back(succ.prob.upper);
            }
            VertexSet vs;
            try {
                vs = enumerate_vertices(canonical_form(lo, hi), budget);
            } catch (const VertexBudgetError& e) {
                throw VertexBudgetError("state " + std::to_string(s) + ", action " +
                                        std::to_string(a) + ": " + e.what());
            }
            table.total_vertices += vs.size();
            table.max_vertices = std::max(table.max_vertices, vs.size());
            table.vertices[s].push_back(std::move(vs));
        }
    }
    return table;
}

std::size_t count_robust_constraints(const SemiInfiniteProgram& program,
                                     const VertexTable& vertices) {
    std::size_t count = 0;
    for (const auto& fam : program.families)
        for (StateId s = 0; s < program.num_states; ++s) {
            if (fam.role[s] != StateRole::Free)
                continue;
            std::size_t combos = 1;
            for (const auto& vs : vertices.vertices[s])
                combos *= vs.size();
            count += combos;
        }
    return count;
}

double ConvexifiedBilinear::convex_part(double y, double z) const {
    if (role == BilinearRole::Reach)
        return d * (y * y + z * z);
    return d * (y + z) * (y + z);
}

double ConvexifiedBilinear::concave_part(double y, double z) const {
    if (role == BilinearRole::Reach)
        return -d * (y + z) * (y + z);
    return -d * (y * y + z * z);
}

ConvexifiedBilinear convexify_bilinear(double d, BilinearRole role, double y_hat, double z_hat) {
    if (!(d > 0.0))
        throw ContractViolation("bilinear coefficient must be positive, got " + std::to_string(d));
    if (!std::isfinite(y_hat) || !std::isfinite(z_hat))
        throw ContractViolation("linearisation point must be finite");
    ConvexifiedBilinear out;
    out.role = role;
    out.d = d;
    if (role == BilinearRole::Reach) {
        const double sum = y_hat + z_hat;
        out.constant = d * sum * sum;
        out.coef_y = -2.0 * d * sum;
        out.coef_z = -2.0 * d * sum;
    } else {
        out.constant = d * (y_hat * y_hat + z_hat * z_hat);
        out.coef_y = -2.0 * d * y_hat;
        out.coef_z = -2.0 * d * z_hat;
    }
    return out;
}

namespace {

// Accumulates one constraint: linear terms merged by variable, univariate
// squares merged by variable, sums (y+z)^2 merged by pair.
struct ConstraintBuilder {
    std::map<VarId, double> linear;
    double constant = 0.0;
    std::map<VarId, double> squares;
    std::map<std::pair<VarId, VarId>, double> pair_squares;

    void clear() {
        linear.clear();
        constant = 0.0;
        squares.clear();
        pair_squares.clear();
    }

    QcqpConstraint build() const {
        QcqpConstraint con;
        for (const auto& [v, coef] : linear)
            if (coef != 0.0)
                con.affine.add(v, coef);
        con.affine.constant = constant;
        for (const auto& [v, coef] : squares) {
            QuadraticAtom atom;
            atom.coef = coef;
            atom.expr.add(v, 1.0);
            con.atoms.push_back(std::move(atom));
        }
        for (const auto& [vars, coef] : pair_squares) {
            QuadraticAtom atom;
            atom.coef = coef;
            atom.expr.add(vars.first, 1.0).add(vars.second, 1.0);
            con.atoms.push_back(std::move(atom));
        }
        return con;
    }
};

QcqpConstraint bound(VarId v, double coef, double constant) {
    QcqpConstraint con;
    con.affine.add(v, coef);
    con.affine.constant = constant;
    return con;
}

} // namespace

InstantiatedProgram instantiate_robust(const SemiInfiniteProgram& program,
                                       const IntervalPomdp& model, const VertexTable& vertices,
                                       const LinearizationPoint& point, double tau,
                                       std::size_t max_constraints) {
    if (!(tau > 0.0))
        throw ContractViolation("penalty weight must be positive");
    if (vertices.vertices.size() != program.num_states)
        throw ContractViolation("vertex table does not cover every state");
    if (point.sigma.size() != program.num_observations ||
        point.values.size() != program.families.size())
        throw ContractViolation("linearisation point does not match the program");

    const std::size_t robust = count_robust_constraints(program, vertices);
    if (robust > max_constraints)
        throw VertexBudgetError("instantiation would create " + std::to_string(robust) +
                                " robust constraints (limit " + std::to_string(max_constraints) +
                                "); sparsify the model");

    InstantiatedProgram out;
    ConvexQcqp& qp = out.qcqp;
    out.value_scale.assign(program.families.size(), 1.0);
    for (std::size_t f = 0; f < program.families.size(); ++f) {
        if (program.families[f].reach)
            continue;
        for (StateId s = 0; s < program.num_states; ++s)
            if (program.families[f].role[s] == StateRole::Free && std::isfinite(point.values[f][s]))
                out.value_scale[f] = std::max(out.value_scale[f], std::abs(point.values[f][s]));
    }
    qp.num_variables = program.num_variables;
    qp.names = program.names;
    out.robust_constraint_count = robust;

    // Penalty variables.
    out.penalty.assign(program.families.size(), std::vector<VarId>(program.num_states, kNoVar));
    for (std::size_t f = 0; f < program.families.size(); ++f) {
        const auto& fam = program.families[f];
        for (StateId s = 0; s < program.num_states; ++s) {
            if (fam.role[s] != StateRole::Free)
                continue;
            const VarId k = qp.add_variable((fam.reach ? "k" : "l") + std::to_string(f) + "_" +
                                            std::to_string(s));
            out.penalty[f][s] = k;
            out.penalty_vars.push_back(k);
        }
    }

    // Objective f + tau * sum(penalties) in original units, divided by the
    // largest scale.
    {
        const double norm = *std::max_element(out.value_scale.begin(), out.value_scale.end());
        const std::size_t of = program.objective_family;
        const auto& fam = program.families[of];
        const StateId s0 = program.initial;
        if (fam.var[s0] != kNoVar && fam.role[s0] == StateRole::Free)
            qp.objective.add(fam.var[s0],
                             (program.objective == ObjectiveKind::MaximizeReach ? -1.0 : 1.0) *
                                 out.value_scale[of] / norm);
        for (std::size_t f = 0; f < program.families.size(); ++f)
            for (VarId k : out.penalty[f])
                if (k != kNoVar)
                    qp.objective.add(k, tau * out.value_scale[f] / norm);
    }

    // Policy simplex and graph-preserving lower bounds.
    for (ObsId z = 0; z < program.num_observations; ++z) {
        AffineExpr simplex;
        for (ActionId a = 0; a < program.num_actions; ++a) {
            simplex.add(program.sigma_var[z][a], 1.0);
            qp.inequalities.push_back(bound(program.sigma_var[z][a], -1.0, program.eps_graph));
        }
        simplex.constant = -1.0;
        qp.equalities.push_back(std::move(simplex));
    }

    for (std::size_t f = 0; f < program.families.size(); ++f) {
        const auto& fam = program.families[f];
        const auto& spec = program.specs[fam.spec_index];
        for (StateId s = 0; s < program.num_states; ++s) {
            const VarId v = fam.var[s];
            if (v == kNoVar)
                continue;
            if (fam.role[s] == StateRole::Fixed) {
                AffineExpr eq;
                eq.add(v, 1.0);
                eq.constant = -fam.fixed_value[s] / out.value_scale[f];
                qp.equalities.push_back(std::move(eq));
                continue;
            }
            qp.inequalities.push_back(bound(v, -1.0, 0.0));
            if (fam.reach)
                qp.inequalities.push_back(bound(v, 1.0, -1.0));
            qp.inequalities.push_back(bound(out.penalty[f][s], -1.0, 0.0));
        }

        // Threshold at the initial state.
        const StateId s0 = program.initial;
        if (fam.role[s0] == StateRole::Free) {
            if (fam.reach)
                qp.inequalities.push_back(bound(fam.var[s0], -1.0, spec.threshold));
            else
                qp.inequalities.push_back(
                    bound(fam.var[s0], 1.0, -spec.threshold / out.value_scale[f]));
        }
    }

    // Robust Bellman constraints, one per vertex combination.
    ConstraintBuilder builder;
    std::vector<std::size_t> choice;
    for (std::size_t f = 0; f < program.families.size(); ++f) {
        const auto& fam = program.families[f];
        const auto& value_hat = point.values[f];
        const double scale = out.value_scale[f];
        for (StateId s = 0; s < program.num_states; ++s) {
            if (fam.role[s] != StateRole::Free)
                continue;
            const auto& sigma_vars = program.sigma_var[model.observation(s)];
            const auto& sigma_hat = point.sigma[model.observation(s)];
            const auto& per_action = vertices.vertices[s];
            choice.assign(program.num_actions, 0);
            for (;;) {
                builder.clear();
                if (fam.reach) {
                    // p_s - k_s - sum_a sigma_a sum_s' P p_s' <= 0
                    builder.linear[fam.var[s]] += 1.0;
                    builder.linear[out.penalty[f][s]] -= 1.0;
                } else {
                    // sum_a sigma_a (r + sum_s' P c_s') - c_s - l_s <= 0
                    builder.linear[fam.var[s]] -= 1.0;
                    builder.linear[out.penalty[f][s]] -= 1.0;
                }
                for (ActionId a = 0; a < program.num_actions; ++a) {
                    const VarId y = sigma_vars[a];
                    const double y_hat = sigma_hat[a];
                    if (!fam.reach && model.cost(s, a) != 0.0)
                        builder.linear[y] += model.cost(s, a) / scale;
                    const auto& succs = model.successors(s, a);
                    const auto& x = per_action[a].vertices[choice[a]];
                    for (std::size_t k = 0; k < succs.size(); ++k) {
                        const StateId t = succs[k].state;
                        const double prob = x[k];
                        if (fam.role[t] != StateRole::Free) {
                            // Known successor value: the product is linear in sigma.
                            const double val = fam.fixed_value[t] / scale;
                            if (val != 0.0)
                                builder.linear[y] += (fam.reach ? -1.0 : 1.0) * prob * val;
                            continue;
                        }
                        const VarId zv = fam.var[t];
                        const auto cvx = convexify_bilinear(
                            prob / 2.0,
                            fam.reach ? BilinearRole::Reach : BilinearRole::Cost, y_hat,
                            value_hat[t] / scale);
                        if (fam.reach) {
                            builder.squares[y] += cvx.d;
                            builder.squares[zv] += cvx.d;
                        } else {
                            builder.pair_squares[{y, zv}] += cvx.d;
                        }
                        builder.constant += cvx.constant;
                        builder.linear[y] += cvx.coef_y;
                        builder.linear[zv] += cvx.coef_z;
                    }
                }
                qp.inequalities.push_back(builder.build());

                ActionId a = 0;
                for (; a < program.num_actions; ++a) {
                    if (++choice[a] < per_action[a].size())
                        break;
                    choice[a] = 0;
                }
                if (a == program.num_actions)
                    break;
            }
        }
    }
    return out;
}

} // namespace rpomdp
