#pragma once

// Finite convex QCQP: linear objective, linear equalities and inequalities
// of the form  sum_i coef_i * q_i(x)^2 + a^T x + b <= 0  with coef_i > 0.

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rpomdp {

using VarId = std::size_t;

struct LinearTerm {
    VarId var = 0;
    double coef = 0.0;
};

struct AffineExpr {
    std::vector<LinearTerm> terms;
    double constant = 0.0;

    AffineExpr& add(VarId var, double coef) {
        terms.push_back({var, coef});
        return *this;
    }
    double eval(std::span<const double> x) const {
        double v = constant;
        for (const auto& t : terms)
            v += t.coef * x[t.var];
        return v;
    }
};

/// coef * expr^2, coef > 0.
struct QuadraticAtom {
    double coef = 0.0;
    AffineExpr expr;
};

/// affine + sum(atoms) <= 0
struct QcqpConstraint {
    AffineExpr affine;
    std::vector<QuadraticAtom> atoms;

    double eval(std::span<const double> x) const {
        double v = affine.eval(x);
        for (const auto& atom : atoms) {
            const double q = atom.expr.eval(x);
            v += atom.coef * q * q;
        }
        return v;
    }
};

struct ConvexQcqp {
    std::size_t num_variables = 0;
    std::vector<std::string> names;
    /// Minimised.
    AffineExpr objective;
    /// expr == 0
    std::vector<AffineExpr> equalities;
    std::vector<QcqpConstraint> inequalities;

    VarId add_variable(std::string name) {
        names.push_back(std::move(name));
        return num_variables++;
    }

    /// Largest violation over all constraints at x (<= 0 when feasible).
    double max_violation(std::span<const double> x) const {
        double worst = -1e300;
        for (const auto& eq : equalities) {
            const double v = eq.eval(x);
            worst = std::max(worst, v < 0 ? -v : v);
        }
        for (const auto& c : inequalities)
            worst = std::max(worst, c.eval(x));
        return worst;
    }
};

} // namespace rpomdp
