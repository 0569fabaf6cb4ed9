#include "rpomdp/conic.hpp"
#include "rpomdp/errors.hpp"

#include <doctest.h>

#include <random>

using namespace rpomdp;

namespace {

std::vector<double> source_point(const ConicProblem& conic, const SolveReport& r) {
    return {r.x.data(), r.x.data() + conic.num_source_variables};
}

// min x  s.t.  coef * (x - shift)^2 - bound <= 0
ConvexQcqp one_dim(double coef, double shift, double bound) {
    ConvexQcqp q;
    const VarId x = q.add_variable("x");
    q.objective.add(x, 1.0);
    QcqpConstraint c;
    c.affine.constant = -bound;
    QuadraticAtom atom;
    atom.coef = coef;
    atom.expr.add(x, 1.0).constant = -shift;
    c.atoms.push_back(atom);
    q.inequalities.push_back(c);
    return q;
}

// Random feasible QCQP: a box, a few convex quadratic constraints through
// an interior point and a random linear objective.
ConvexQcqp random_qcqp(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ConvexQcqp q;
    const std::size_t n = 3;
    for (std::size_t i = 0; i < n; ++i) {
        q.add_variable("x" + std::to_string(i));
        q.objective.add(i, u(rng));
        QcqpConstraint hi, lo;
        hi.affine.add(i, 1.0).constant = -2.0;
        lo.affine.add(i, -1.0).constant = -2.0;
        q.inequalities.push_back(hi);
        q.inequalities.push_back(lo);
    }
    for (int k = 0; k < 3; ++k) {
        QcqpConstraint c;
        for (std::size_t i = 0; i < n; ++i)
            c.affine.add(i, u(rng));
        c.affine.constant = -1.0;
        for (int a = 0; a < 2; ++a) {
            QuadraticAtom atom;
            atom.coef = 0.1 + std::abs(u(rng));
            for (std::size_t i = 0; i < n; ++i)
                atom.expr.add(i, u(rng));
            atom.expr.constant = 0.5 * u(rng);
            c.atoms.push_back(atom);
        }
        // Shift so that x = 0 is strictly feasible.
        std::vector<double> zero(n, 0.0);
        c.affine.constant -= c.eval(zero) + 0.5;
        q.inequalities.push_back(c);
    }
    q.equalities.push_back(AffineExpr{{{0, 1.0}, {1, 1.0}, {2, 1.0}}, -0.3});
    return q;
}

} // namespace

TEST_CASE("linear problem has no cones") {
    ConvexQcqp q;
    const VarId x = q.add_variable("x");
    q.objective.add(x, 1.0);
    QcqpConstraint c;
    c.affine.add(x, -1.0).constant = 1.0; // x >= 1
    q.inequalities.push_back(c);
    const auto conic = qcqp_to_conic(q);
    CHECK(conic.cone_sizes.empty());
    CHECK(conic.num_nonnegative == 1);
    const auto r = solve(conic);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("quadratic constraint") {
    const auto conic = qcqp_to_conic(one_dim(1.0, 0.0, 4.0));
    CHECK(conic.cone_sizes == std::vector<std::size_t>{3});
    const auto r = solve(conic);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.x(0) == doctest::Approx(-2.0).epsilon(1e-6));
    CHECK(r.objective == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("epigraph of a square") {
    // min t  s.t.  x = 3, x^2 <= t.
    ConvexQcqp q;
    const VarId x = q.add_variable("x");
    const VarId t = q.add_variable("t");
    q.objective.add(t, 1.0);
    q.equalities.push_back(AffineExpr{{{x, 1.0}}, -3.0});
    QcqpConstraint c;
    c.affine.add(t, -1.0);
    c.atoms.push_back({1.0, AffineExpr{{{x, 1.0}}, 0.0}});
    q.inequalities.push_back(c);
    const auto r = solve(qcqp_to_conic(q));
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.x(1) == doctest::Approx(9.0).epsilon(1e-6));
}

TEST_CASE("sum-of-squares membership") {
    // 0.25 (y + z)^2 + y - 1 <= 0, maximise z with y = 0: z <= 2.
    ConvexQcqp q;
    const VarId y = q.add_variable("y");
    const VarId z = q.add_variable("z");
    q.objective.add(z, -1.0);
    q.equalities.push_back(AffineExpr{{{y, 1.0}}, 0.0});
    QcqpConstraint c;
    c.affine.add(y, 1.0).constant = -1.0;
    c.atoms.push_back({0.25, AffineExpr{{{y, 1.0}, {z, 1.0}}, 0.0}});
    q.inequalities.push_back(c);
    const auto conic = qcqp_to_conic(q);
    const auto r = solve(conic);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.x(1) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(q.max_violation(source_point(conic, r)) <= 1e-6);
}

TEST_CASE("infeasible problem is reported") {
    ConvexQcqp q = one_dim(1.0, 0.0, 1.0);
    QcqpConstraint far;
    far.affine.add(0, -1.0).constant = 5.0; // x >= 5
    q.inequalities.push_back(far);
    const auto r = solve(qcqp_to_conic(q));
    CHECK(r.status == SolveStatus::Infeasible);
}

TEST_CASE("nonconvex atoms are rejected") {
    CHECK_THROWS_AS(qcqp_to_conic(one_dim(-1.0, 0.0, 4.0)), ConvexityError);
    CHECK_THROWS_AS(qcqp_to_conic(one_dim(0.0, 0.0, 4.0)), ConvexityError);
}

TEST_CASE("repeated atoms share one epigraph variable") {
    ConvexQcqp q = one_dim(1.0, 0.5, 4.0);
    q.inequalities.push_back(q.inequalities[0]);
    const auto conic = qcqp_to_conic(q);
    CHECK(conic.cone_sizes.size() == 1);
    CHECK(conic.num_variables == 2);
}

TEST_CASE("reformulation preserves constraint values") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto q = random_qcqp(rng);
        const auto conic = qcqp_to_conic(q);
        // Map sample x to the conic space with t at their tightest values.
        for (int sample = 0; sample < 20; ++sample) {
            Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(conic.num_variables));
            std::vector<double> src(q.num_variables);
            for (std::size_t i = 0; i < q.num_variables; ++i)
                x(static_cast<Eigen::Index>(i)) = src[i] = u(rng);
            // Tightest t per cone: the third cone row holds 2q(x).
            std::size_t row = conic.num_nonnegative;
            for (std::size_t k = 0; k < conic.cone_sizes.size(); ++k, row += 3) {
                const double twice_q =
                    conic.h(static_cast<Eigen::Index>(row + 2)) -
                    (conic.G.row(static_cast<Eigen::Index>(row + 2)) * x)(0);
                x(static_cast<Eigen::Index>(q.num_variables + k)) = 0.25 * twice_q * twice_q;
            }
            const Eigen::VectorXd slack = conic.h - conic.G * x;
            for (std::size_t i = 0; i < q.inequalities.size(); ++i)
                CHECK(-slack(static_cast<Eigen::Index>(i)) ==
                      doctest::Approx(q.inequalities[i].eval(src)).epsilon(1e-10));
        }
    }
}

TEST_CASE("optimal points are feasible and solves are deterministic") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const auto q = random_qcqp(rng);
        const auto conic = qcqp_to_conic(q);
        const auto a = solve(conic);
        REQUIRE(a.status == SolveStatus::Optimal);
        CHECK(q.max_violation(source_point(conic, a)) <= 1e-6);
        const auto b = solve(conic);
        CHECK(a.x == b.x);
        CHECK(a.iterations == b.iterations);
    }
}

TEST_CASE("CBF round trip") {
    std::mt19937_64 rng(29);
    const auto conic = qcqp_to_conic(random_qcqp(rng));
    const auto back = read_cbf(write_cbf(conic));
    CHECK(back.num_variables == conic.num_variables);
    CHECK(back.num_nonnegative == conic.num_nonnegative);
    CHECK(back.cone_sizes == conic.cone_sizes);
    CHECK(Eigen::MatrixXd(back.A).isApprox(Eigen::MatrixXd(conic.A), 1e-15));
    CHECK(Eigen::MatrixXd(back.G).isApprox(Eigen::MatrixXd(conic.G), 1e-15));
    CHECK(back.c == conic.c);
    CHECK(back.b == conic.b);
    CHECK(back.h == conic.h);
    const auto r1 = solve(conic), r2 = solve(back);
    CHECK(r1.objective == doctest::Approx(r2.objective).epsilon(1e-9));
}
