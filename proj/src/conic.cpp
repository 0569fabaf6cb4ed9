#include "rpomdp/conic.hpp"

#include "rpomdp/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <utility>

namespace rpomdp {

std::size_t ConicProblem::num_cone_rows() const {
    std::size_t rows = num_nonnegative;
    for (auto q : cone_sizes)
        rows += q;
    return rows;
}

void ConicProblem::validate() const {
    const auto n = static_cast<Eigen::Index>(num_variables);
    if (c.size() != n)
        throw ContractViolation("objective length does not match the variable count");
    if (A.cols() != n || G.cols() != n)
        throw ContractViolation("constraint matrices do not match the variable count");
    if (A.rows() != b.size())
        throw ContractViolation("equality right-hand side has the wrong length");
    if (G.rows() != h.size())
        throw ContractViolation("cone right-hand side has the wrong length");
    if (static_cast<std::size_t>(G.rows()) != num_cone_rows())
        throw ContractViolation("cone dimensions do not cover the rows of G");
    if (num_source_variables > num_variables)
        throw ContractViolation("more source variables than variables");
    for (auto q : cone_sizes)
        if (q < 1)
            throw ContractViolation("second-order cone of dimension 0");
}

const char* to_string(SolveStatus status) {
    switch (status) {
    case SolveStatus::Optimal:
        return "optimal";
    case SolveStatus::Infeasible:
        return "infeasible";
    case SolveStatus::Unbounded:
        return "unbounded";
    case SolveStatus::NumericalFailure:
        return "numerical_failure";
    }
    return "unknown";
}

namespace {

using Triplet = Eigen::Triplet<double>;

// Canonical key of an affine expression: merged, sorted terms plus constant.
struct ExprKey {
    std::vector<std::pair<VarId, double>> terms;
    double constant = 0.0;

    friend bool operator<(const ExprKey& a, const ExprKey& b) {
        if (a.terms != b.terms)
            return a.terms < b.terms;
        return a.constant < b.constant;
    }
};

ExprKey canonical(const AffineExpr& expr) {
    std::map<VarId, double> merged;
    for (const auto& t : expr.terms)
        merged[t.var] += t.coef;
    ExprKey key;
    for (const auto& [var, coef] : merged)
        if (coef != 0.0)
            key.terms.emplace_back(var, coef);
    key.constant = expr.constant;
    return key;
}

void check_vars(const AffineExpr& expr, std::size_t n) {
    for (const auto& t : expr.terms)
        if (t.var >= n)
            throw ContractViolation("QCQP expression references unknown variable " +
                                    std::to_string(t.var));
}

} // namespace

ConicProblem qcqp_to_conic(const ConvexQcqp& problem) {
    const std::size_t n0 = problem.num_variables;
    check_vars(problem.objective, n0);

    std::map<ExprKey, VarId> epigraph;
    std::vector<const ExprKey*> epigraph_exprs;
    std::size_t n = n0;
    for (const auto& con : problem.inequalities) {
        check_vars(con.affine, n0);
        for (const auto& atom : con.atoms) {
            if (!(atom.coef > 0.0))
                throw ConvexityError("quadratic atom with nonpositive coefficient " +
                                     std::to_string(atom.coef));
            check_vars(atom.expr, n0);
            auto [it, inserted] = epigraph.try_emplace(canonical(atom.expr), n);
            if (inserted) {
                epigraph_exprs.push_back(&it->first);
                ++n;
            }
        }
    }

    ConicProblem out;
    out.num_variables = n;
    out.num_source_variables = n0;
    out.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (const auto& t : problem.objective.terms)
        out.c(static_cast<Eigen::Index>(t.var)) += t.coef;
    out.objective_offset = problem.objective.constant;

    std::vector<Triplet> a_entries;
    out.b.resize(static_cast<Eigen::Index>(problem.equalities.size()));
    for (std::size_t i = 0; i < problem.equalities.size(); ++i) {
        const auto& eq = problem.equalities[i];
        check_vars(eq, n0);
        for (const auto& t : eq.terms)
            a_entries.emplace_back(static_cast<int>(i), static_cast<int>(t.var), t.coef);
        out.b(static_cast<Eigen::Index>(i)) = -eq.constant;
    }
    out.A.resize(static_cast<Eigen::Index>(problem.equalities.size()),
                 static_cast<Eigen::Index>(n));
    out.A.setFromTriplets(a_entries.begin(), a_entries.end());

    const std::size_t m_lin = problem.inequalities.size();
    const std::size_t m = m_lin + 3 * epigraph_exprs.size();
    std::vector<Triplet> g_entries;
    out.h.resize(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m_lin; ++i) {
        const auto& con = problem.inequalities[i];
        const int row = static_cast<int>(i);
        for (const auto& t : con.affine.terms)
            g_entries.emplace_back(row, static_cast<int>(t.var), t.coef);
        for (const auto& atom : con.atoms) {
            const VarId t = epigraph.at(canonical(atom.expr));
            g_entries.emplace_back(row, static_cast<int>(t), atom.coef);
        }
        out.h(row) = -con.affine.constant;
    }
    out.num_nonnegative = m_lin;

    // s = (1 + t, t - 1, 2 q(x)) in Q^3  <=>  q(x)^2 <= t
    std::size_t row = m_lin;
    for (std::size_t k = 0; k < epigraph_exprs.size(); ++k) {
        const ExprKey& key = *epigraph_exprs[k];
        const int t = static_cast<int>(n0 + k);
        g_entries.emplace_back(static_cast<int>(row), t, -1.0);
        out.h(static_cast<Eigen::Index>(row)) = 1.0;
        g_entries.emplace_back(static_cast<int>(row + 1), t, -1.0);
        out.h(static_cast<Eigen::Index>(row + 1)) = -1.0;
        for (const auto& [var, coef] : key.terms)
            g_entries.emplace_back(static_cast<int>(row + 2), static_cast<int>(var), -2.0 * coef);
        out.h(static_cast<Eigen::Index>(row + 2)) = 2.0 * key.constant;
        out.cone_sizes.push_back(3);
        row += 3;
    }
    out.G.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    out.G.setFromTriplets(g_entries.begin(), g_entries.end());
    return out;
}

// ---------------------------------------------------------------------------
// CBF text form

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_matrix(const SparseMatrix& m, Eigen::Index row_offset, double sign,
                  std::vector<std::string>& lines) {
    for (Eigen::Index col = 0; col < m.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(m, col); it; ++it)
            if (it.value() != 0.0)
                lines.push_back(std::to_string(it.row() + row_offset) + " " +
                                std::to_string(it.col()) + " " + fmt(sign * it.value()));
}

} // namespace

std::string write_cbf(const ConicProblem& problem) {
    problem.validate();
    const auto p = problem.A.rows();
    const auto m = problem.G.rows();
    std::ostringstream out;
    out << "# rpomdp conic problem\n";
    out << "# source-variables " << problem.num_source_variables << "\n";
    out << "VER\n3\n\n";
    out << "OBJSENSE\nMIN\n\n";
    out << "VAR\n" << problem.num_variables << " 1\nF " << problem.num_variables << "\n\n";

    std::size_t blocks = 0;
    std::ostringstream cones;
    if (p > 0) {
        cones << "L= " << p << "\n";
        ++blocks;
    }
    if (problem.num_nonnegative > 0) {
        cones << "L+ " << problem.num_nonnegative << "\n";
        ++blocks;
    }
    for (auto q : problem.cone_sizes) {
        cones << "Q " << q << "\n";
        ++blocks;
    }
    out << "CON\n" << (p + m) << " " << blocks << "\n" << cones.str() << "\n";

    std::vector<std::string> lines;
    for (Eigen::Index j = 0; j < problem.c.size(); ++j)
        if (problem.c(j) != 0.0)
            lines.push_back(std::to_string(j) + " " + fmt(problem.c(j)));
    out << "OBJACOORD\n" << lines.size() << "\n";
    for (const auto& l : lines)
        out << l << "\n";
    out << "\n";
    if (problem.objective_offset != 0.0)
        out << "OBJBCOORD\n" << fmt(problem.objective_offset) << "\n\n";

    // Rows: A x - b in L=, then h - G x in L+ / Q.
    lines.clear();
    write_matrix(problem.A, 0, 1.0, lines);
    write_matrix(problem.G, p, -1.0, lines);
    out << "ACOORD\n" << lines.size() << "\n";
    for (const auto& l : lines)
        out << l << "\n";
    out << "\n";

    lines.clear();
    for (Eigen::Index i = 0; i < p; ++i)
        if (problem.b(i) != 0.0)
            lines.push_back(std::to_string(i) + " " + fmt(-problem.b(i)));
    for (Eigen::Index i = 0; i < m; ++i)
        if (problem.h(i) != 0.0)
            lines.push_back(std::to_string(i + p) + " " + fmt(problem.h(i)));
    out << "BCOORD\n" << lines.size() << "\n";
    for (const auto& l : lines)
        out << l << "\n";
    return out.str();
}

ConicProblem read_cbf(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    std::size_t source_vars = 0;
    bool have_source_vars = false;

    auto next_line = [&]() -> std::string {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.rfind("# source-variables", 0) == 0) {
                source_vars = std::stoul(line.substr(18));
                have_source_vars = true;
                continue;
            }
            if (line.empty() || line[0] == '#')
                continue;
            return line;
        }
        return {};
    };
    auto fail = [&](const std::string& msg) -> ParseError { return ParseError(msg, line_no, 1); };

    std::size_t num_vars = 0;
    std::size_t num_rows = 0;
    std::vector<std::pair<std::string, std::size_t>> con_blocks;
    std::vector<std::pair<std::size_t, double>> obj;
    double obj_offset = 0.0;
    std::vector<std::tuple<std::size_t, std::size_t, double>> acoord;
    std::vector<std::pair<std::size_t, double>> bcoord;

    for (std::string key = next_line(); !key.empty(); key = next_line()) {
        std::istringstream header(key);
        std::string section;
        header >> section;
        if (section == "VER") {
            std::istringstream v(next_line());
            int ver = 0;
            v >> ver;
            if (ver < 1 || ver > 3)
                throw fail("unsupported CBF version");
        } else if (section == "OBJSENSE") {
            if (next_line().rfind("MIN", 0) != 0)
                throw fail("only OBJSENSE MIN is supported");
        } else if (section == "VAR") {
            std::istringstream v(next_line());
            std::size_t blocks = 0;
            v >> num_vars >> blocks;
            for (std::size_t k = 0; k < blocks; ++k) {
                std::istringstream b(next_line());
                std::string cone;
                b >> cone;
                if (cone != "F")
                    throw fail("only free variables are supported");
            }
        } else if (section == "CON") {
            std::istringstream v(next_line());
            std::size_t blocks = 0;
            v >> num_rows >> blocks;
            for (std::size_t k = 0; k < blocks; ++k) {
                std::istringstream b(next_line());
                std::string cone;
                std::size_t size = 0;
                b >> cone >> size;
                con_blocks.emplace_back(cone, size);
            }
        } else if (section == "OBJACOORD") {
            std::size_t count = std::stoul(next_line());
            for (std::size_t k = 0; k < count; ++k) {
                std::istringstream e(next_line());
                std::size_t j = 0;
                double v = 0.0;
                if (!(e >> j >> v))
                    throw fail("malformed OBJACOORD entry");
                obj.emplace_back(j, v);
            }
        } else if (section == "OBJBCOORD") {
            obj_offset = std::stod(next_line());
        } else if (section == "ACOORD") {
            std::size_t count = std::stoul(next_line());
            for (std::size_t k = 0; k < count; ++k) {
                std::istringstream e(next_line());
                std::size_t i = 0;
                std::size_t j = 0;
                double v = 0.0;
                if (!(e >> i >> j >> v))
                    throw fail("malformed ACOORD entry");
                acoord.emplace_back(i, j, v);
            }
        } else if (section == "BCOORD") {
            std::size_t count = std::stoul(next_line());
            for (std::size_t k = 0; k < count; ++k) {
                std::istringstream e(next_line());
                std::size_t i = 0;
                double v = 0.0;
                if (!(e >> i >> v))
                    throw fail("malformed BCOORD entry");
                bcoord.emplace_back(i, v);
            }
        } else {
            throw fail("unsupported CBF section " + section);
        }
    }

    // Equality rows must come first, then L+, then Q blocks.
    std::size_t p = 0;
    ConicProblem out;
    std::size_t stage = 0;
    for (const auto& [cone, size] : con_blocks) {
        if (cone == "L=") {
            if (stage > 0)
                throw fail("L= rows must precede cone rows");
            p += size;
        } else if (cone == "L+") {
            if (stage > 1)
                throw fail("L+ rows must precede Q rows");
            stage = 1;
            out.num_nonnegative += size;
        } else if (cone == "Q") {
            stage = 2;
            out.cone_sizes.push_back(size);
        } else {
            throw fail("unsupported constraint cone " + cone);
        }
    }
    const std::size_t m = num_rows - p;

    out.num_variables = num_vars;
    out.num_source_variables = have_source_vars ? source_vars : num_vars;
    out.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_vars));
    for (const auto& [j, v] : obj)
        out.c(static_cast<Eigen::Index>(j)) += v;
    out.objective_offset = obj_offset;

    std::vector<Triplet> a_entries;
    std::vector<Triplet> g_entries;
    for (const auto& [i, j, v] : acoord) {
        if (i >= num_rows || j >= num_vars)
            throw fail("ACOORD index out of range");
        if (i < p)
            a_entries.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
        else
            g_entries.emplace_back(static_cast<int>(i - p), static_cast<int>(j), -v);
    }
    out.A.resize(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(num_vars));
    out.A.setFromTriplets(a_entries.begin(), a_entries.end());
    out.G.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(num_vars));
    out.G.setFromTriplets(g_entries.begin(), g_entries.end());
    out.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    out.h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    for (const auto& [i, v] : bcoord) {
        if (i >= num_rows)
            throw fail("BCOORD index out of range");
        if (i < p)
            out.b(static_cast<Eigen::Index>(i)) = -v;
        else
            out.h(static_cast<Eigen::Index>(i - p)) = v;
    }
    out.validate();
    return out;
}

} // namespace rpomdp
