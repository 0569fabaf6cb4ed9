#include "rpomdp/model_io.hpp"

#include "rpomdp/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>
#include <vector>

namespace rpomdp {

namespace {

struct Token {
    std::string_view text;
    std::size_t column = 0;
};

struct Record {
    std::size_t line = 0;
    std::vector<Token> tokens;
};

std::vector<Record> tokenize(std::string_view text) {
    std::vector<Record> records;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        Record rec;
        rec.line = line_no;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
                ++i;
            const std::size_t begin = i;
            while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
                ++i;
            if (i > begin)
                rec.tokens.push_back({line.substr(begin, i - begin), begin + 1});
        }
        if (!rec.tokens.empty())
            records.push_back(std::move(rec));
        if (end == text.size())
            break;
        pos = end + 1;
    }
    return records;
}

[[noreturn]] void fail(const Record& rec, const Token& tok, const std::string& message) {
    throw ParseError(message, rec.line, tok.column);
}

std::size_t parse_index(const Record& rec, const Token& tok, const char* what) {
    std::size_t value = 0;
    const auto* first = tok.text.data();
    const auto* last = first + tok.text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        fail(rec, tok, std::string("expected a nonnegative integer for ") + what + ", got '" +
                           std::string(tok.text) + "'");
    return value;
}

double parse_number(const Record& rec, const Token& tok, const char* what) {
    double value = 0.0;
    const auto* first = tok.text.data();
    const auto* last = first + tok.text.size();
    if (first != last && *first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value))
        fail(rec, tok, std::string("expected a finite number for ") + what + ", got '" +
                           std::string(tok.text) + "'");
    return value;
}

void expect_arity(const Record& rec, std::size_t arity) {
    if (rec.tokens.size() != arity + 1) {
        const Token& at = rec.tokens.size() > arity + 1 ? rec.tokens[arity + 1] : rec.tokens.back();
        fail(rec, at,
             "'" + std::string(rec.tokens[0].text) + "' takes " + std::to_string(arity) +
                 " argument" + (arity == 1 ? "" : "s"));
    }
}

std::size_t checked(const Record& rec, const Token& tok, const char* what, std::size_t bound) {
    const std::size_t v = parse_index(rec, tok, what);
    if (v >= bound)
        fail(rec, tok,
             std::string(what) + " " + std::to_string(v) + " out of range (" +
                 std::to_string(bound) + " declared)");
    return v;
}

} // namespace

IntervalPomdp parse_model(std::string_view text) {
    const auto records = tokenize(text);

    std::optional<std::size_t> header[3];
    const char* header_names[3] = {"states", "actions", "observations"};
    const Record* header_rec[3] = {nullptr, nullptr, nullptr};
    for (const auto& rec : records)
        for (int h = 0; h < 3; ++h)
            if (rec.tokens[0].text == header_names[h]) {
                expect_arity(rec, 1);
                if (header[h])
                    fail(rec, rec.tokens[0],
                         std::string("duplicate '") + header_names[h] + "' record");
                const std::size_t v = parse_index(rec, rec.tokens[1], header_names[h]);
                if (v == 0)
                    fail(rec, rec.tokens[1], std::string(header_names[h]) + " must be positive");
                header[h] = v;
                header_rec[h] = &rec;
            }
    for (int h = 0; h < 3; ++h)
        if (!header[h])
            throw ParseError(std::string("missing '") + header_names[h] + "' record",
                             records.empty() ? 1 : records.back().line, 1);

    PomdpData data;
    data.num_states = *header[0];
    data.num_actions = *header[1];
    data.num_observations = *header[2];
    const std::size_t n = data.num_states;
    const std::size_t m = data.num_actions;
    data.transitions.assign(n, std::vector<SuccessorList>(m));
    data.costs.assign(n, std::vector<double>(m, 0.0));
    data.observation.assign(n, 0);

    std::vector<const Record*> obs_rec(n, nullptr);
    std::vector<std::vector<const Record*>> cost_rec(n, std::vector<const Record*>(m, nullptr));
    std::vector<std::vector<const Record*>> first_trans(n, std::vector<const Record*>(m, nullptr));
    std::map<std::tuple<StateId, ActionId, StateId>, std::size_t> trans_seen;
    std::vector<bool> is_target(n, false);
    std::vector<bool> is_goal(n, false);
    const Record* init_rec = nullptr;

    for (const auto& rec : records) {
        const auto kw = rec.tokens[0].text;
        const auto& t = rec.tokens;
        if (kw == "states" || kw == "actions" || kw == "observations")
            continue;
        if (kw == "init") {
            expect_arity(rec, 1);
            if (init_rec)
                fail(rec, t[0], "duplicate 'init' record");
            data.initial = checked(rec, t[1], "state", n);
            init_rec = &rec;
        } else if (kw == "obs") {
            expect_arity(rec, 2);
            const StateId s = checked(rec, t[1], "state", n);
            if (obs_rec[s])
                fail(rec, t[0], "duplicate observation for state " + std::to_string(s) +
                                    " (first on line " + std::to_string(obs_rec[s]->line) + ")");
            data.observation[s] = checked(rec, t[2], "observation", data.num_observations);
            obs_rec[s] = &rec;
        } else if (kw == "trans") {
            expect_arity(rec, 5);
            const StateId s = checked(rec, t[1], "state", n);
            const ActionId a = checked(rec, t[2], "action", m);
            const StateId s2 = checked(rec, t[3], "state", n);
            const double lo = parse_number(rec, t[4], "lower bound");
            const double hi = parse_number(rec, t[5], "upper bound");
            if (!(lo > 0.0))
                fail(rec, t[4], "lower bound must be strictly positive (graph preservation)");
            if (lo > hi)
                fail(rec, t[4], "lower bound exceeds upper bound");
            if (hi > 1.0)
                fail(rec, t[5], "upper bound exceeds 1");
            const auto key = std::make_tuple(s, a, s2);
            if (const auto it = trans_seen.find(key); it != trans_seen.end())
                fail(rec, t[0], "duplicate transition (first on line " +
                                    std::to_string(it->second) + ")");
            trans_seen.emplace(key, rec.line);
            data.transitions[s][a].push_back({s2, {lo, hi}});
            if (!first_trans[s][a])
                first_trans[s][a] = &rec;
        } else if (kw == "cost") {
            expect_arity(rec, 3);
            const StateId s = checked(rec, t[1], "state", n);
            const ActionId a = checked(rec, t[2], "action", m);
            const double r = parse_number(rec, t[3], "cost");
            if (r < 0.0)
                fail(rec, t[3], "cost must be nonnegative");
            if (cost_rec[s][a])
                fail(rec, t[0], "duplicate cost (first on line " +
                                    std::to_string(cost_rec[s][a]->line) + ")");
            data.costs[s][a] = r;
            cost_rec[s][a] = &rec;
        } else if (kw == "target" || kw == "goal") {
            expect_arity(rec, 1);
            const StateId s = checked(rec, t[1], "state", n);
            auto& flags = kw == "target" ? is_target : is_goal;
            if (flags[s])
                fail(rec, t[0], "state " + std::to_string(s) + " listed twice");
            flags[s] = true;
            (kw == "target" ? data.targets : data.goals).push_back(s);
        } else {
            fail(rec, t[0], "unknown record '" + std::string(kw) + "'");
        }
    }

    const Record& states_rec = *header_rec[0];
    if (!init_rec)
        throw ParseError("missing 'init' record", states_rec.line, 1);
    for (StateId s = 0; s < n; ++s) {
        if (!obs_rec[s])
            throw ParseError("state " + std::to_string(s) + " has no 'obs' record",
                             states_rec.line, 1);
        for (ActionId a = 0; a < m; ++a) {
            if (!first_trans[s][a])
                throw ParseError("state " + std::to_string(s) + ", action " + std::to_string(a) +
                                     " has no 'trans' record",
                                 states_rec.line, 1);
            try {
                validate_successors(data.transitions[s][a], n,
                                    "state " + std::to_string(s) + ", action " + std::to_string(a));
            } catch (const Error& e) {
                throw ParseError(e.what(), first_trans[s][a]->line, 1);
            }
        }
    }
    return IntervalPomdp(std::move(data));
}

IntervalPomdp load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open model file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string serialize_model(const IntervalPomdp& model) {
    const auto& d = model.data();
    std::ostringstream out;
    out << "states " << d.num_states << "\n";
    out << "actions " << d.num_actions << "\n";
    out << "observations " << d.num_observations << "\n";
    out << "init " << d.initial << "\n";
    for (StateId s = 0; s < d.num_states; ++s)
        out << "obs " << s << " " << d.observation[s] << "\n";
    for (StateId s = 0; s < d.num_states; ++s)
        for (ActionId a = 0; a < d.num_actions; ++a) {
            for (const auto& succ : d.transitions[s][a])
                out << "trans " << s << " " << a << " " << succ.state << " "
                    << fmt(succ.prob.lower) << " " << fmt(succ.prob.upper) << "\n";
            if (d.costs[s][a] != 0.0)
                out << "cost " << s << " " << a << " " << fmt(d.costs[s][a]) << "\n";
        }
    for (StateId s : d.targets)
        out << "target " << s << "\n";
    for (StateId s : d.goals)
        out << "goal " << s << "\n";
    return out.str();
}

void save_model(const IntervalPomdp& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write model file '" + path.string() + "'");
    out << serialize_model(model);
}

} // namespace rpomdp
