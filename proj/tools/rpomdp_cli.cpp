// Command-line front end: robust policy synthesis and stand-alone
// verification for interval POMDPs.

#include "rpomdp/benchmarks.hpp"
#include "rpomdp/ccp.hpp"
#include "rpomdp/errors.hpp"
#include "rpomdp/model_io.hpp"
#include "rpomdp/report.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

enum Exit { kCertified = 0, kError = 1, kInfeasible = 2, kTimeout = 3 };

rpomdp::Interval parse_slip(const std::string& text) {
    auto number = [&](std::string_view s) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
            throw rpomdp::ValidationError("bad slip value '" + text + "'");
        return v;
    };
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
        const double v = number(text);
        return {v, v};
    }
    return {number(std::string_view(text).substr(0, comma)),
            number(std::string_view(text).substr(comma + 1))};
}

rpomdp::Cell parse_cell(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw rpomdp::ValidationError("trap cell must be written x,y");
    try {
        return {std::stoul(text.substr(0, comma)), std::stoul(text.substr(comma + 1))};
    } catch (const std::exception&) {
        throw rpomdp::ValidationError("bad trap cell '" + text + "'");
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw rpomdp::Error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void emit(const std::string& record, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << record;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out)
        throw rpomdp::Error("cannot write '" + out_path + "'");
    out << record;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust policy synthesis for interval POMDPs"};
    app.set_version_flag("--version", "rpomdp 1.0");

    std::string model_path;
    std::string generator;
    std::string slip_text;
    std::size_t width = 4;
    std::size_t height = 4;
    std::vector<std::string> trap_texts;
    std::vector<std::string> spec_texts;
    std::string objective = "auto";
    std::string out_path;
    std::string verify_path;
    std::string emit_model_path;
    bool no_timings = false;
    bool verbose = false;
    rpomdp::CcpParams params;
    params.solver = rpomdp::SolverSettings::from_environment();
    double timeout = 0.0;

    auto* model_opt = app.add_option("--model", model_path, "Model file");
    auto* gen_opt = app.add_option("--gen", generator, "Built-in benchmark")
                        ->check(CLI::IsMember({"grid", "maze"}));
    model_opt->excludes(gen_opt);
    app.add_option("--slip", slip_text,
                   "Slip probability P or interval LO,HI (default 0.98 grid, 0.97 maze)");
    app.add_option("--width", width, "Grid width")->capture_default_str();
    app.add_option("--height", height, "Grid height")->capture_default_str();
    app.add_option("--trap", trap_texts, "Grid trap cell x,y (repeatable; replaces the default)");
    app.add_option("--spec", spec_texts, "reach>=L@T or cost<=K@T (repeatable)");
    app.add_option("--objective", objective, "Optimised family")
        ->check(CLI::IsMember({"auto", "reach", "cost"}))
        ->capture_default_str();
    app.add_option("--tau0", params.tau0)->capture_default_str();
    app.add_option("--mu", params.mu)->capture_default_str();
    app.add_option("--tau-max", params.tau_max)->capture_default_str();
    app.add_option("--eps-graph", params.eps_graph)->capture_default_str();
    app.add_option("--max-iters", params.max_iterations, "CCP iterations per run")
        ->capture_default_str();
    app.add_option("--restarts", params.max_restarts)->capture_default_str();
    app.add_option("--seed", params.seed)->capture_default_str();
    app.add_option("--timeout", timeout, "Wall-clock limit in seconds (0: none)")
        ->capture_default_str();
    app.add_option("--out", out_path, "Write the JSON record here instead of stdout");
    app.add_option("--verify-only", verify_path,
                   "Verify the policy in this JSON file instead of synthesising");
    app.add_option("--emit-model", emit_model_path, "Write the model in text form and exit");
    app.add_flag("--no-timings", no_timings, "Omit wall-clock timings from the record");
    app.add_flag("-v,--verbose", verbose, "Log every iteration to stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kError;
    }

    try {
        if (model_path.empty() && generator.empty())
            throw rpomdp::ValidationError("one of --model or --gen is required");

        std::optional<rpomdp::IntervalPomdp> model;
        std::string source;
        if (!model_path.empty()) {
            model = rpomdp::load_model(model_path);
            source = model_path;
        } else if (generator == "grid") {
            const auto slip = parse_slip(slip_text.empty() ? "0.98" : slip_text);
            std::vector<rpomdp::Cell> traps;
            for (const auto& t : trap_texts)
                traps.push_back(parse_cell(t));
            if (trap_texts.empty() && width == 4 && height == 4)
                traps = rpomdp::default_grid_traps();
            model = rpomdp::gen_grid(width, height, slip, traps);
            source = "grid:" + (slip_text.empty() ? std::string("0.98") : slip_text);
        } else {
            const auto slip = parse_slip(slip_text.empty() ? "0.97" : slip_text);
            model = rpomdp::gen_maze(slip);
            source = "maze:" + (slip_text.empty() ? std::string("0.97") : slip_text);
        }

        if (!emit_model_path.empty()) {
            rpomdp::save_model(*model, emit_model_path);
            if (spec_texts.empty())
                return kCertified;
        }

        if (spec_texts.empty())
            throw rpomdp::ValidationError("at least one --spec is required");
        std::vector<rpomdp::Specification> specs;
        for (const auto& s : spec_texts)
            specs.push_back(rpomdp::parse_spec(s, *model));

        rpomdp::RecordOptions options;
        options.include_timings = !no_timings;
        options.model_source = source;

        if (!verify_path.empty()) {
            const auto policy = rpomdp::read_policy(read_file(verify_path));
            policy.validate(model->num_observations(), model->num_actions());
            const auto chain = rpomdp::induce_chain(*model, policy);
            const auto check = rpomdp::check(chain, specs, params.verify);
            emit(rpomdp::verification_record(check, policy, *model, specs, options), out_path);
            return check.satisfied ? kCertified : kInfeasible;
        }

        params.timeout_seconds = timeout;
        params.objective = objective == "reach"  ? rpomdp::ObjectiveChoice::Reach
                           : objective == "cost" ? rpomdp::ObjectiveChoice::Cost
                                                 : rpomdp::ObjectiveChoice::Auto;
        if (verbose)
            params.on_iteration = [](const rpomdp::IterationRecord& rec) {
                std::cerr << "run " << rec.restart << " iter " << rec.iteration << " tau " << rec.tau
                          << " " << rpomdp::to_string(rec.solve_status) << " penalty "
                          << rec.penalty_sum << " solve " << rec.solve_seconds << "s verify "
                          << rec.verify_seconds << "s values";
                for (double v : rec.initial_values)
                    std::cerr << " " << v;
                std::cerr << "\n";
            };
        const auto result = rpomdp::run_ccp(*model, specs, params);
        emit(rpomdp::result_record(result, *model, specs, options), out_path);
        switch (result.status) {
        case rpomdp::SynthesisStatus::Certified:
            return kCertified;
        case rpomdp::SynthesisStatus::Infeasible:
            return kInfeasible;
        case rpomdp::SynthesisStatus::Timeout:
            return kTimeout;
        }
        return kError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    }
}
