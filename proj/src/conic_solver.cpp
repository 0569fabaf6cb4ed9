// Homogeneous self-dual primal-dual interior-point method with
// Nesterov-Todd scaling and Mehrotra predictor-corrector steps. The KKT
// system is quasi-definite after static regularisation and is factorised with
// a sparse LDL^T, followed by iterative refinement against the unregularised
// matrix.

#include "rpomdp/conic.hpp"

#include "rpomdp/errors.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

namespace rpomdp {

SolverSettings SolverSettings::from_environment() {
    SolverSettings settings;
    if (const char* env = std::getenv("RPOMDP_SOLVER_TIMEOUT")) {
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (end != env && v > 0.0)
            settings.timeout_seconds = v;
    }
    return settings;
}

namespace {

using Vec = Eigen::VectorXd;
using Index = Eigen::Index;
using Triplet = Eigen::Triplet<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Layout of K = R_+^l x Q^{q_1} x ... : the cone blocks as row ranges.
struct ConeLayout {
    Index nonneg = 0;
    std::vector<Index> offsets;
    std::vector<Index> sizes;
    Index total = 0;

    explicit ConeLayout(const ConicProblem& p) : nonneg(static_cast<Index>(p.num_nonnegative)) {
        Index off = nonneg;
        for (auto q : p.cone_sizes) {
            offsets.push_back(off);
            sizes.push_back(static_cast<Index>(q));
            off += static_cast<Index>(q);
        }
        total = off;
    }
    Index degree() const { return nonneg + static_cast<Index>(sizes.size()); }
};

// Nesterov-Todd scaling point. W is symmetric, W z = W^{-1} s = lambda.
struct Scaling {
    Vec nonneg_w;                      // diag of W on the orthant
    std::vector<Eigen::MatrixXd> soc_w; // W per second-order cone
    std::vector<Eigen::MatrixXd> soc_winv;
    Vec lambda;
};

double soc_det(const Eigen::Ref<const Vec>& u) {
    return u(0) * u(0) - u.tail(u.size() - 1).squaredNorm();
}

// Residual of u in the cone: >0 means interior.
double cone_margin(const ConeLayout& L, const Vec& u) {
    double margin = kInf;
    for (Index i = 0; i < L.nonneg; ++i)
        margin = std::min(margin, u(i));
    for (std::size_t k = 0; k < L.sizes.size(); ++k) {
        const auto blk = u.segment(L.offsets[k], L.sizes[k]);
        margin = std::min(margin, blk(0) - blk.tail(blk.size() - 1).norm());
    }
    return margin;
}

void add_identity(const ConeLayout& L, Vec& u, double alpha) {
    for (Index i = 0; i < L.nonneg; ++i)
        u(i) += alpha;
    for (std::size_t k = 0; k < L.sizes.size(); ++k)
        u(L.offsets[k]) += alpha;
}

Scaling compute_scaling(const ConeLayout& L, const Vec& s, const Vec& z) {
    Scaling sc;
    sc.lambda.resize(L.total);
    sc.nonneg_w.resize(L.nonneg);
    for (Index i = 0; i < L.nonneg; ++i) {
        sc.nonneg_w(i) = std::sqrt(s(i) / z(i));
        sc.lambda(i) = std::sqrt(s(i) * z(i));
    }
    for (std::size_t k = 0; k < L.sizes.size(); ++k) {
        const Index off = L.offsets[k];
        const Index q = L.sizes[k];
        const Vec sk = s.segment(off, q);
        const Vec zk = z.segment(off, q);
        const double sdet = std::max(soc_det(sk), 1e-300);
        const double zdet = std::max(soc_det(zk), 1e-300);
        const Vec sbar = sk / std::sqrt(sdet);
        const Vec zbar = zk / std::sqrt(zdet);
        const double gamma = std::sqrt(std::max((1.0 + sbar.dot(zbar)) / 2.0, 1e-300));
        Vec wbar(q);
        wbar(0) = (sbar(0) + zbar(0)) / (2.0 * gamma);
        wbar.tail(q - 1) = (sbar.tail(q - 1) - zbar.tail(q - 1)) / (2.0 * gamma);
        const double eta = std::pow(sdet / zdet, 0.25);

        Eigen::MatrixXd W(q, q);
        Eigen::MatrixXd Winv(q, q);
        const Vec w1 = wbar.tail(q - 1);
        W(0, 0) = wbar(0);
        W.block(0, 1, 1, q - 1) = w1.transpose();
        W.block(1, 0, q - 1, 1) = w1;
        W.block(1, 1, q - 1, q - 1) = Eigen::MatrixXd::Identity(q - 1, q - 1) +
                                      w1 * w1.transpose() / (1.0 + wbar(0));
        Winv = W;
        Winv.block(0, 1, 1, q - 1) *= -1.0;
        Winv.block(1, 0, q - 1, 1) *= -1.0;
        W *= eta;
        Winv /= eta;
        sc.lambda.segment(off, q) = W * zk;
        sc.soc_w.push_back(std::move(W));
        sc.soc_winv.push_back(std::move(Winv));
    }
    return sc;
}

Vec apply_w(const ConeLayout& L, const Scaling& sc, const Vec& v, bool inverse) {
    Vec out(L.total);
    for (Index i = 0; i < L.nonneg; ++i)
        out(i) = inverse ? v(i) / sc.nonneg_w(i) : v(i) * sc.nonneg_w(i);
    for (std::size_t k = 0; k < L.sizes.size(); ++k) {
        const auto& M = inverse ? sc.soc_winv[k] : sc.soc_w[k];
        out.segment(L.offsets[k], L.sizes[k]) = M * v.segment(L.offsets[k], L.sizes[k]);
    }
    return out;
}

// Jordan product u o v.
Vec jordan(const ConeLayout& L, const Vec& u, const Vec& v) {
    Vec out(L.total);
    for (Index i = 0; i < L.nonneg; ++i)
        out(i) = u(i) * v(i);
    for (std::size_t k = 0; k < L.sizes.size(); ++k) {
        const Index off = L.offsets[k];
        const Index q = L.sizes[k];
        out(off) = u.segment(off, q).dot(v.segment(off, q));
        out.segment(off + 1, q - 1) =
            u(off) * v.segment(off + 1, q - 1) + v(off) * u.segment(off + 1, q - 1);
    }
    return out;
}

// Solves lambda o x = d.
Vec jordan_divide(const ConeLayout& L, const Vec& lambda, const Vec& d) {
    Vec out(L.total);
    for (Index i = 0; i < L.nonneg; ++i)
        out(i) = d(i) / lambda(i);
    for (std::size_t k = 0; k < L.sizes.size(); ++k) {
        const Index off = L.offsets[k];
        const Index q = L.sizes[k];
        const auto l = lambda.segment(off, q);
        const auto dd = d.segment(off, q);
        const double det = soc_det(l);
        const double x0 = (l(0) * dd(0) - l.tail(q - 1).dot(dd.tail(q - 1))) / det;
        out(off) = x0;
        out.segment(off + 1, q - 1) = (dd.tail(q - 1) - x0 * l.tail(q - 1)) / l(0);
    }
    return out;
}

// Largest alpha >= 0 with u + alpha du inside the cone (may be +inf).
double max_step(const ConeLayout& L, const Vec& u, const Vec& du) {
    double alpha = kInf;
    for (Index i = 0; i < L.nonneg; ++i)
        if (du(i) < 0.0)
            alpha = std::min(alpha, -u(i) / du(i));
    for (std::size_t k = 0; k < L.sizes.size(); ++k) {
        const Index off = L.offsets[k];
        const Index q = L.sizes[k];
        const auto x = u.segment(off, q);
        const auto d = du.segment(off, q);
        const double a = soc_det(d);
        const double b = 2.0 * (x(0) * d(0) - x.tail(q - 1).dot(d.tail(q - 1)));
        const double c = std::max(soc_det(x), 0.0);
        // Leaving through the apex side: x0 + alpha d0 hits 0 first.
        if (d(0) < 0.0)
            alpha = std::min(alpha, -x(0) / d(0));
        double root = kInf;
        if (std::abs(a) <= 1e-14 * (std::abs(b) + std::abs(c) + 1e-300)) {
            if (b < 0.0)
                root = -c / b;
        } else {
            const double disc = b * b - 4.0 * a * c;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                const double qv = -0.5 * (b + (b >= 0.0 ? sq : -sq));
                double r1 = qv / a;
                double r2 = qv != 0.0 ? c / qv : kInf;
                if (r1 > r2)
                    std::swap(r1, r2);
                if (r1 > 0.0)
                    root = r1;
                else if (r2 > 0.0)
                    root = r2;
            }
        }
        alpha = std::min(alpha, root);
    }
    return alpha;
}

struct Equilibration {
    Vec col;    // D
    Vec eq_row; // E_A
    Vec cone_row; // E_G
};

// Ruiz scaling of [A; G]; rows of one second-order cone share a factor.
Equilibration equilibrate(const ConicProblem& p, const ConeLayout& L, std::size_t passes) {
    const Index n = static_cast<Index>(p.num_variables);
    Equilibration eq{Vec::Ones(n), Vec::Ones(p.A.rows()), Vec::Ones(p.G.rows())};
    if (passes == 0)
        return eq;
    SparseMatrix A = p.A;
    SparseMatrix G = p.G;
    for (std::size_t pass = 0; pass < passes; ++pass) {
        Vec colmax = Vec::Zero(n);
        Vec amax = Vec::Zero(A.rows());
        Vec gmax = Vec::Zero(G.rows());
        for (Index j = 0; j < A.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(A, j); it; ++it) {
                const double v = std::abs(it.value());
                colmax(j) = std::max(colmax(j), v);
                amax(it.row()) = std::max(amax(it.row()), v);
            }
        for (Index j = 0; j < G.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(G, j); it; ++it) {
                const double v = std::abs(it.value());
                colmax(j) = std::max(colmax(j), v);
                gmax(it.row()) = std::max(gmax(it.row()), v);
            }
        for (std::size_t k = 0; k < L.sizes.size(); ++k) {
            auto blk = gmax.segment(L.offsets[k], L.sizes[k]);
            blk.setConstant(blk.maxCoeff());
        }
        auto factor = [](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 1.0; };
        Vec dc(n);
        Vec da(A.rows());
        Vec dg(G.rows());
        for (Index j = 0; j < n; ++j)
            dc(j) = factor(colmax(j));
        for (Index i = 0; i < A.rows(); ++i)
            da(i) = factor(amax(i));
        for (Index i = 0; i < G.rows(); ++i)
            dg(i) = factor(gmax(i));
        A = da.asDiagonal() * A * dc.asDiagonal();
        G = dg.asDiagonal() * G * dc.asDiagonal();
        eq.col = eq.col.cwiseProduct(dc);
        eq.eq_row = eq.eq_row.cwiseProduct(da);
        eq.cone_row = eq.cone_row.cwiseProduct(dg);
    }
    auto clamp = [](Vec& v) {
        for (Index i = 0; i < v.size(); ++i)
            v(i) = std::clamp(v(i), 1e-4, 1e4);
    };
    clamp(eq.col);
    clamp(eq.eq_row);
    clamp(eq.cone_row);
    return eq;
}

class KktSolver {
  public:
    KktSolver(const SparseMatrix& A, const SparseMatrix& G, const ConeLayout& L, double delta,
              std::size_t refinement)
        : A_(A), G_(G), At_(A.transpose()), Gt_(G.transpose()), L_(L), delta_(delta),
          refinement_(refinement), n_(A.cols()), p_(A.rows()), m_(G.rows()) {}

    // Factorises K(W) = [0 A' G'; A 0 0; G 0 -W^2] plus regularisation.
    bool factor(const Scaling& sc) {
        sc_ = &sc;
        std::vector<Triplet> t;
        t.reserve(static_cast<std::size_t>(n_ + p_ + A_.nonZeros() + G_.nonZeros() + 3 * m_));
        for (Index j = 0; j < n_; ++j)
            t.emplace_back(j, j, delta_);
        for (Index j = 0; j < A_.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(A_, j); it; ++it)
                t.emplace_back(n_ + it.row(), j, it.value());
        for (Index i = 0; i < p_; ++i)
            t.emplace_back(n_ + i, n_ + i, -delta_);
        for (Index j = 0; j < G_.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(G_, j); it; ++it)
                t.emplace_back(n_ + p_ + it.row(), j, it.value());
        const Index base = n_ + p_;
        for (Index i = 0; i < L_.nonneg; ++i) {
            const double w = sc.nonneg_w(i);
            t.emplace_back(base + i, base + i, -w * w - delta_);
        }
        for (std::size_t k = 0; k < L_.sizes.size(); ++k) {
            const Eigen::MatrixXd W2 = sc.soc_w[k] * sc.soc_w[k];
            const Index off = base + L_.offsets[k];
            for (Index c = 0; c < L_.sizes[k]; ++c)
                for (Index r = c; r < L_.sizes[k]; ++r)
                    t.emplace_back(off + r, off + c, -W2(r, c) - (r == c ? delta_ : 0.0));
        }
        const Index dim = n_ + p_ + m_;
        K_.resize(dim, dim);
        K_.setFromTriplets(t.begin(), t.end());
        if (!analyzed_) {
            ldl_.analyzePattern(K_);
            analyzed_ = true;
        }
        ldl_.factorize(K_);
        return ldl_.info() == Eigen::Success;
    }

    // Solves the unregularised system for rhs = (rx, ry, rz).
    Vec solve(const Vec& rhs) const {
        Vec u = ldl_.solve(rhs);
        for (std::size_t it = 0; it < refinement_; ++it) {
            const Vec r = rhs - multiply(u);
            if (r.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>()))
                break;
            u += ldl_.solve(r);
        }
        return u;
    }

  private:
    Vec multiply(const Vec& u) const {
        const auto ux = u.head(n_);
        const auto uy = u.segment(n_, p_);
        const Vec uz = u.tail(m_);
        Vec out(n_ + p_ + m_);
        out.head(n_) = At_ * uy + Gt_ * uz;
        out.segment(n_, p_) = A_ * ux;
        Vec w2z = apply_w(L_, *sc_, apply_w(L_, *sc_, uz, false), false);
        out.tail(m_) = G_ * ux - w2z;
        return out;
    }

    const SparseMatrix& A_;
    const SparseMatrix& G_;
    SparseMatrix At_;
    SparseMatrix Gt_;
    const ConeLayout& L_;
    double delta_;
    std::size_t refinement_;
    Index n_, p_, m_;
    const Scaling* sc_ = nullptr;
    SparseMatrix K_;
    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldl_;
    bool analyzed_ = false;
};

} // namespace

SolveReport solve(const ConicProblem& problem, const SolverSettings& settings) {
    problem.validate();
    const auto started = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    };

    const ConeLayout L(problem);
    const Index n = static_cast<Index>(problem.num_variables);
    const Index p = problem.A.rows();
    const Index m = problem.G.rows();

    const Equilibration eq =
        equilibrate(problem, L, settings.equilibrate ? settings.equilibration_passes : 0);
    const SparseMatrix A = eq.eq_row.asDiagonal() * problem.A * eq.col.asDiagonal();
    const SparseMatrix G = eq.cone_row.asDiagonal() * problem.G * eq.col.asDiagonal();
    const Vec c = eq.col.cwiseProduct(problem.c);
    const Vec b = eq.eq_row.cwiseProduct(problem.b);
    const Vec h = eq.cone_row.cwiseProduct(problem.h);

    SolveReport report;
    auto unscale = [&](const Vec& x, const Vec& y, const Vec& z, const Vec& s, double tau) {
        report.x = eq.col.cwiseProduct(x) / tau;
        report.y = eq.eq_row.cwiseProduct(y) / tau;
        report.z = eq.cone_row.cwiseProduct(z) / tau;
        report.s = s.cwiseQuotient(eq.cone_row) / tau;
        report.objective = problem.c.dot(report.x) + problem.objective_offset;
    };

    KktSolver kkt(A, G, L, settings.regularization, settings.refinement_steps);

    // Initial point: least-squares primal and dual estimates shifted into the cone.
    Scaling identity;
    identity.nonneg_w = Vec::Ones(L.nonneg);
    for (std::size_t k = 0; k < L.sizes.size(); ++k) {
        identity.soc_w.push_back(Eigen::MatrixXd::Identity(L.sizes[k], L.sizes[k]));
        identity.soc_winv.push_back(Eigen::MatrixXd::Identity(L.sizes[k], L.sizes[k]));
    }
    if (!kkt.factor(identity)) {
        report.status = SolveStatus::NumericalFailure;
        report.message = "initial KKT factorisation failed";
        report.wall_time = elapsed();
        return report;
    }
    Vec rhs(n + p + m);
    rhs << Vec::Zero(n), b, h;
    Vec u = kkt.solve(rhs);
    Vec x = u.head(n);
    Vec s = -u.tail(m);
    rhs << -c, Vec::Zero(p), Vec::Zero(m);
    u = kkt.solve(rhs);
    Vec y = u.segment(n, p);
    Vec z = u.tail(m);
    {
        const double alpha_p = -cone_margin(L, s);
        if (alpha_p >= 0.0 || m == 0)
            add_identity(L, s, 1.0 + std::max(alpha_p, 0.0));
        const double alpha_d = -cone_margin(L, z);
        if (alpha_d >= 0.0 || m == 0)
            add_identity(L, z, 1.0 + std::max(alpha_d, 0.0));
    }
    double tau = 1.0;
    double kappa = 1.0;

    const double bnorm = std::max(problem.b.size() ? problem.b.lpNorm<Eigen::Infinity>() : 0.0,
                                  problem.h.size() ? problem.h.lpNorm<Eigen::Infinity>() : 0.0);
    const double cnorm = problem.c.size() ? problem.c.lpNorm<Eigen::Infinity>() : 0.0;
    const double degree = static_cast<double>(L.degree());
    const SparseMatrix At = A.transpose();
    const SparseMatrix Gt = G.transpose();
    const SparseMatrix A0t = problem.A.transpose();
    const SparseMatrix G0t = problem.G.transpose();

    auto inf_norm = [](const Vec& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; };

    report.status = SolveStatus::NumericalFailure;
    report.message = "iteration limit reached";
    for (std::size_t iter = 0;; ++iter) {
        // Residuals of the embedding.
        const Vec rx = At * y + Gt * z + c * tau;
        const Vec ry = -(A * x) + b * tau;
        const Vec rz = s + G * x - h * tau;
        const double rt = kappa + c.dot(x) + b.dot(y) + h.dot(z);

        // Convergence and certificates in the original scaling.
        unscale(x, y, z, s, tau);
        report.iterations = iter;
        {
            const Vec pr_eq = problem.A * report.x - problem.b;
            const Vec pr_cone = problem.G * report.x + report.s - problem.h;
            const Vec dr = A0t * report.y + G0t * report.z + problem.c;
            report.primal_residual = std::max(inf_norm(pr_eq), inf_norm(pr_cone)) / (1.0 + bnorm);
            report.dual_residual = inf_norm(dr) / (1.0 + cnorm);
            report.gap = report.s.dot(report.z);
            const double pcost = problem.c.dot(report.x);
            const double dcost = -problem.b.dot(report.y) - problem.h.dot(report.z);
            double relgap = kInf;
            if (pcost < 0.0)
                relgap = report.gap / -pcost;
            else if (dcost > 0.0)
                relgap = report.gap / dcost;
            if (report.primal_residual < settings.feasibility_tolerance &&
                report.dual_residual < settings.feasibility_tolerance &&
                (report.gap < settings.absolute_gap_tolerance ||
                 relgap < settings.relative_gap_tolerance)) {
                report.status = SolveStatus::Optimal;
                report.message.clear();
                break;
            }
            // Certificates use the unnormalised iterates.
            const Vec yc = eq.eq_row.cwiseProduct(y);
            const Vec zc = eq.cone_row.cwiseProduct(z);
            const double hz_by = problem.b.dot(yc) + problem.h.dot(zc);
            if (hz_by < 0.0) {
                const double res = inf_norm(A0t * yc + G0t * zc) / -hz_by;
                if (res < settings.feasibility_tolerance) {
                    report.status = SolveStatus::Infeasible;
                    report.message = "primal infeasibility certificate found";
                    report.y = yc / -hz_by;
                    report.z = zc / -hz_by;
                    break;
                }
            }
            const Vec xc = eq.col.cwiseProduct(x);
            const double cx = problem.c.dot(xc);
            if (cx < 0.0) {
                const Vec sc0 = s.cwiseQuotient(eq.cone_row);
                const double res =
                    std::max(inf_norm(problem.A * xc), inf_norm(problem.G * xc + sc0)) / -cx;
                if (res < settings.feasibility_tolerance) {
                    report.status = SolveStatus::Unbounded;
                    report.message = "dual infeasibility certificate found";
                    report.x = xc / -cx;
                    break;
                }
            }
        }
        if (iter >= settings.max_iterations)
            break;
        if (elapsed() > settings.timeout_seconds) {
            report.timed_out = true;
            report.message = "solver timeout";
            break;
        }

        const Scaling sc = compute_scaling(L, s, z);
        if (!kkt.factor(sc)) {
            report.message = "KKT factorisation failed";
            break;
        }
        rhs << -c, b, h;
        const Vec u1 = kkt.solve(rhs);
        const auto x1 = u1.head(n);
        const auto y1 = u1.segment(n, p);
        const auto z1 = u1.tail(m);
        const double denom_base = c.dot(x1) + b.dot(y1) + h.dot(z1) - kappa / tau;

        struct Direction {
            Vec dx, dy, dz, ds;
            double dtau = 0.0, dkappa = 0.0;
        };
        auto direction = [&](double eta, const Vec& ds_target, double dkappa_target) {
            const Vec w_div = apply_w(L, sc, jordan_divide(L, sc.lambda, ds_target), false);
            Vec r(n + p + m);
            r << -eta * rx, eta * ry, -eta * rz - w_div;
            const Vec u2 = kkt.solve(r);
            Direction d;
            const double num = -eta * rt - dkappa_target / tau - c.dot(u2.head(n)) -
                               b.dot(u2.segment(n, p)) - h.dot(u2.tail(m));
            d.dtau = num / denom_base;
            d.dx = u2.head(n) + d.dtau * x1;
            d.dy = u2.segment(n, p) + d.dtau * y1;
            d.dz = u2.tail(m) + d.dtau * z1;
            d.ds = w_div - apply_w(L, sc, apply_w(L, sc, d.dz, false), false);
            d.dkappa = (dkappa_target - kappa * d.dtau) / tau;
            return d;
        };
        auto step_length = [&](const Direction& d) {
            double a = std::min(max_step(L, s, d.ds), max_step(L, z, d.dz));
            if (d.dtau < 0.0)
                a = std::min(a, -tau / d.dtau);
            if (d.dkappa < 0.0)
                a = std::min(a, -kappa / d.dkappa);
            return a;
        };

        // Predictor.
        const Vec lam2 = jordan(L, sc.lambda, sc.lambda);
        const Direction aff = direction(1.0, -lam2, -tau * kappa);
        const double alpha_aff = std::min(1.0, step_length(aff));
        const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);
        const double mu = (s.dot(z) + tau * kappa) / (degree + 1.0);

        // Corrector.
        Vec ds_target = -lam2 - jordan(L, apply_w(L, sc, aff.ds, true), apply_w(L, sc, aff.dz, false));
        add_identity(L, ds_target, sigma * mu);
        const double dk_target = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
        const Direction d = direction(1.0 - sigma, ds_target, dk_target);
        const double alpha = std::min(1.0, 0.99 * step_length(d));
        if (!(alpha > 1e-12)) {
            report.message = "step length collapsed";
            break;
        }
        x += alpha * d.dx;
        y += alpha * d.dy;
        z += alpha * d.dz;
        s += alpha * d.ds;
        tau += alpha * d.dtau;
        kappa += alpha * d.dkappa;
        if (!(tau > 0.0) || !std::isfinite(tau) || !x.allFinite()) {
            report.message = "iterates diverged";
            break;
        }
    }
    report.wall_time = elapsed();
    return report;
}

} // namespace rpomdp
