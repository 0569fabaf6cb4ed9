#include "rpomdp/report.hpp"

#include "rpomdp/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>

namespace rpomdp {

using Json = nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

double parse_threshold(const std::string& text, std::string_view spec) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (text.empty() || ec != std::errc() || ptr != last)
        throw ValidationError("bad threshold '" + text + "' in specification '" +
                              std::string(spec) + "'");
    return v;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json spec_entries(const CheckResult& check, const std::vector<Specification>& specs) {
    Json out = Json::array();
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& spec = specs[i];
        const double v = i < check.initial_values.size() ? check.initial_values[i] : NAN;
        const bool ok = spec.is_reach() ? v >= spec.threshold : v <= spec.threshold;
        Json e;
        e["spec"] = spec.to_string();
        e["kind"] = spec.is_reach() ? "reach" : "cost";
        e["threshold"] = spec.threshold;
        e["value"] = number_or_null(v);
        e["satisfied"] = ok;
        out.push_back(std::move(e));
    }
    return out;
}

Json transcript(const CheckResult& check) {
    Json t;
    t["satisfied"] = check.satisfied;
    Json values = Json::array();
    Json residuals = Json::array();
    Json iterations = Json::array();
    Json converged = Json::array();
    for (std::size_t i = 0; i < check.values.size(); ++i) {
        values.push_back(number_or_null(check.initial_values[i]));
        residuals.push_back(check.values[i].residual);
        iterations.push_back(check.values[i].iterations);
        converged.push_back(check.values[i].converged);
    }
    t["values"] = std::move(values);
    t["residuals"] = std::move(residuals);
    t["iterations"] = std::move(iterations);
    t["converged"] = std::move(converged);
    return t;
}

Json policy_table(const Policy& policy) {
    Json rows = Json::array();
    for (const auto& row : policy.table())
        rows.push_back(row);
    return rows;
}

Json model_summary(const std::string& source, std::size_t states, std::size_t actions,
                   std::size_t observations) {
    Json m;
    m["source"] = source;
    m["states"] = states;
    m["actions"] = actions;
    m["observations"] = observations;
    return m;
}

} // namespace

Specification parse_spec(std::string_view text, const IntervalPomdp& model) {
    const std::string s = trim(text);
    const auto at = s.find('@');
    if (at == std::string::npos)
        throw ValidationError("specification '" + s + "' lacks '@targets'");
    const std::string head = s.substr(0, at);
    const std::string tail = trim(std::string_view(s).substr(at + 1));

    SpecKind kind;
    std::string threshold;
    if (head.rfind("reach>=", 0) == 0) {
        kind = SpecKind::ReachAtLeast;
        threshold = trim(std::string_view(head).substr(7));
    } else if (head.rfind("cost<=", 0) == 0) {
        kind = SpecKind::ExpCostAtMost;
        threshold = trim(std::string_view(head).substr(6));
    } else {
        throw ValidationError("specification '" + s + "' must start with 'reach>=' or 'cost<='");
    }

    std::vector<StateId> targets;
    if (tail == "target") {
        targets = model.targets();
    } else if (tail == "goal") {
        targets = model.goals();
    } else {
        std::size_t pos = 0;
        while (pos <= tail.size()) {
            auto comma = tail.find(',', pos);
            if (comma == std::string::npos)
                comma = tail.size();
            const std::string item = trim(std::string_view(tail).substr(pos, comma - pos));
            StateId v = 0;
            const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
            if (item.empty() || ec != std::errc() || ptr != item.data() + item.size())
                throw ValidationError("bad target '" + item + "' in specification '" + s + "'");
            targets.push_back(v);
            pos = comma + 1;
        }
    }
    Specification spec{kind, parse_threshold(threshold, s), std::move(targets)};
    spec.validate(model.num_states());
    return spec;
}

std::string result_record(const SynthesisResult& result, const IntervalPomdp& model,
                          const std::vector<Specification>& specs, const RecordOptions& options) {
    Json r;
    r["status"] = to_string(result.status);
    r["message"] = result.message;
    r["model"] = model_summary(options.model_source, model.num_states(), model.num_actions(),
                               model.num_observations());
    r["specs"] = spec_entries(result.verification, specs);
    r["policy"] = policy_table(result.policy);
    r["iterations"] = result.total_iterations();
    r["iterations_per_restart"] = result.iterations_per_restart;

    Json tau = Json::array();
    Json penalty = Json::array();
    Json objective = Json::array();
    Json solver_iterations = Json::array();
    Json solve_times = Json::array();
    Json verify_times = Json::array();
    for (const auto& rec : result.trace) {
        tau.push_back(rec.tau);
        penalty.push_back(rec.penalty_sum);
        objective.push_back(rec.objective);
        solver_iterations.push_back(rec.solver_iterations);
        solve_times.push_back(rec.solve_seconds);
        verify_times.push_back(rec.verify_seconds);
    }
    r["tau"] = std::move(tau);
    r["penalty_sum"] = std::move(penalty);
    r["objective"] = std::move(objective);
    r["solver_iterations"] = std::move(solver_iterations);

    Json counts;
    counts["robust"] = result.robust_constraint_count;
    counts["qcqp_variables"] = result.qcqp_variables;
    counts["qcqp_constraints"] = result.qcqp_constraints;
    r["constraints"] = std::move(counts);
    Json verts;
    verts["total"] = result.total_vertices;
    verts["max_per_pair"] = result.max_vertices;
    r["vertices"] = std::move(verts);

    if (options.include_timings) {
        Json t;
        t["build"] = result.build_seconds;
        t["solve"] = std::move(solve_times);
        t["verify"] = std::move(verify_times);
        t["total"] = result.total_seconds;
        r["timings"] = std::move(t);
    }
    r["verification"] = transcript(result.verification);
    return r.dump(2) + "\n";
}

std::string verification_record(const CheckResult& check, const Policy& policy,
                                const IntervalPomdp& model,
                                const std::vector<Specification>& specs,
                                const RecordOptions& options) {
    Json r;
    r["status"] = check.satisfied ? "satisfied" : "violated";
    r["model"] = model_summary(options.model_source, model.num_states(), model.num_actions(),
                               model.num_observations());
    r["specs"] = spec_entries(check, specs);
    r["policy"] = policy_table(policy);
    r["verification"] = transcript(check);
    return r.dump(2) + "\n";
}

Policy read_policy(std::string_view json_text) {
    Json doc;
    try {
        doc = Json::parse(json_text);
    } catch (const Json::parse_error& e) {
        throw ValidationError(std::string("policy file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("policy") || !doc["policy"].is_array())
        throw ValidationError("policy file has no 'policy' table");
    std::vector<std::vector<double>> table;
    for (const auto& row : doc["policy"]) {
        if (!row.is_array())
            throw ValidationError("policy rows must be arrays of probabilities");
        std::vector<double> r;
        for (const auto& v : row) {
            if (!v.is_number())
                throw ValidationError("policy entries must be numbers");
            r.push_back(v.get<double>());
        }
        table.push_back(std::move(r));
    }
    return Policy(std::move(table));
}

} // namespace rpomdp
