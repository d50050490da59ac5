#pragma once

#include <tooltree/context.hpp>
#include <tooltree/errors.hpp>
#include <tooltree/evaluation/oracle.hpp>
#include <tooltree/registry.hpp>
#include <tooltree/search/execution.hpp>
#include <tooltree/tool_card.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace tooltree::sim {

enum class ToolRole { gold, distractor, trap };

inline const char* to_string(ToolRole r)
{
    switch (r) {
    case ToolRole::gold: return "gold";
    case ToolRole::distractor: return "distractor";
    case ToolRole::trap: return "trap";
    }
    return "?";
}

inline ToolRole role_from_string(const std::string& s)
{
    if (s == "gold") return ToolRole::gold;
    if (s == "distractor") return ToolRole::distractor;
    if (s == "trap") return ToolRole::trap;
    throw SuiteParseError("unknown tool role: " + s);
}

/// A simulated tool. Gold tools check each input against the value they expect
/// and fail with an error token otherwise; every other tool always answers.
struct SimTool {
    ToolCard card;
    ToolRole role = ToolRole::distractor;
    std::map<std::string, std::string> expects;  ///< input field -> required value
    std::map<std::string, std::string> produces; ///< output field -> value

    bool operator==(const SimTool&) const = default;
};

struct GoldStep {
    std::string tool;
    std::vector<std::size_t> deps; ///< indices into the gold plan
    bool operator==(const GoldStep&) const = default;
};

struct Difficulty {
    int chain_depth = 0;
    int branching = 0;
    int distractors = 0;
    bool operator==(const Difficulty&) const = default;
};

/// One generated problem: a query with an image attachment, the tools on offer,
/// and a gold plan given in one valid execution order. The goal is met once the
/// plan's final tool has run without error.
struct SyntheticTask {
    std::string task_id;
    std::string query;
    std::vector<Attachment> attachments;
    std::vector<SimTool> tools;
    std::vector<GoldStep> gold_plan;
    int planted_count = 0;
    Difficulty difficulty;
    std::uint64_t seed = 0;
    std::size_t index = 0;

    bool operator==(const SyntheticTask&) const = default;

    const SimTool* tool(const std::string& name) const
    {
        for (const auto& t : tools) {
            if (t.card.name == name) {
                return &t;
            }
        }
        return nullptr;
    }

    const std::string& answer_tool() const { return gold_plan.back().tool; }

    bool goal_satisfied(const Context& ctx) const
    {
        const auto& target = answer_tool();
        for (const auto& h : ctx.history) {
            if (h.tool == target && h.output.ok()) {
                return true;
            }
        }
        return false;
    }

    Context initial_context() const
    {
        Context c;
        c.query = query;
        c.attachments = attachments;
        return c;
    }

    ToolRegistry registry() const
    {
        std::vector<ToolCard> cards;
        for (const auto& t : tools) {
            cards.push_back(t.card);
        }
        return make_registry(cards);
    }

    PlanGraph plan_graph() const
    {
        PlanGraph g;
        for (const auto& s : gold_plan) {
            g.steps.push_back({s.tool, s.deps});
        }
        for (const auto& t : tools) {
            if (t.role == ToolRole::trap) {
                g.traps.insert(t.card.name);
            }
        }
        return g;
    }

    std::vector<std::string> gold_tools() const
    {
        std::vector<std::string> out;
        for (const auto& s : gold_plan) {
            out.push_back(s.tool);
        }
        return out;
    }
};

/// Deterministic tool behaviour. Never throws for a schema-valid draft.
inline ToolOutput execute_sim_tool(const SimTool& tool, const ArgumentDraft& draft, const Context& context)
{
    for (const auto& [field, want] : tool.expects) {
        auto it = draft.bindings.find(field);
        if (it == draft.bindings.end()) {
            return ToolOutput::error("missing_argument");
        }
        auto got = resolve(it->second, context);
        if (got && got->is_string() && got->get<std::string>() == want) {
            continue;
        }
        bool from_outputs = std::holds_alternative<OutputRef>(it->second);
        return ToolOutput::error(from_outputs ? "wrong_input" : "missing_dependency");
    }
    ToolOutput out;
    for (const auto& f : tool.card.outputs) {
        auto p = tool.produces.find(f.name);
        out.payload[f.name] = TypedValue{f.type, p == tool.produces.end() ? tool.card.name + ":" + f.name : p->second};
    }
    return out;
}

/// Executor over one task's tools.
class SimExecutor final : public Executor {
public:
    explicit SimExecutor(const SyntheticTask& task) : task_(task) {}

    ToolOutput execute(const ToolCard& card, const ArgumentDraft& args, const Context& context) override
    {
        ++invocations_;
        const auto* t = task_.tool(card.name);
        if (!t) {
            throw ToolFault("unknown_tool");
        }
        return execute_sim_tool(*t, args, context);
    }

    std::size_t invocations() const { return invocations_; }

private:
    const SyntheticTask& task_;
    std::size_t invocations_ = 0;
};

inline OracleJudge make_oracle_evaluator(const SyntheticTask& task, OracleTiers tiers = {})
{
    return OracleJudge(task.plan_graph(), tiers);
}

// ---- JSON lines ----

inline nlohmann::json task_to_json(const SyntheticTask& t)
{
    auto tools = nlohmann::json::array();
    for (const auto& s : t.tools) {
        tools.push_back({{"card", card_to_json(s.card)},
                         {"role", to_string(s.role)},
                         {"expects", s.expects},
                         {"produces", s.produces}});
    }
    auto plan = nlohmann::json::array();
    for (const auto& g : t.gold_plan) {
        plan.push_back({{"tool", g.tool}, {"deps", g.deps}});
    }
    auto atts = nlohmann::json::array();
    for (const auto& a : t.attachments) {
        atts.push_back({{"name", a.name}, {"value", typed_value_to_json(a.value)}});
    }
    return {{"task_id", t.task_id},
            {"query", t.query},
            {"attachments", atts},
            {"tools", tools},
            {"gold_plan", plan},
            {"goal", {{"tool_succeeds", t.answer_tool()}}},
            {"planted_count", t.planted_count},
            {"difficulty",
             {{"chain_depth", t.difficulty.chain_depth},
              {"branching", t.difficulty.branching},
              {"distractors", t.difficulty.distractors}}},
            {"seed", t.seed},
            {"index", t.index}};
}

inline SyntheticTask task_from_json(const nlohmann::json& j)
{
    try {
        SyntheticTask t;
        t.task_id = j.at("task_id").get<std::string>();
        t.query = j.at("query").get<std::string>();
        for (const auto& a : j.at("attachments")) {
            t.attachments.push_back({a.at("name").get<std::string>(), typed_value_from_json(a.at("value"))});
        }
        for (const auto& s : j.at("tools")) {
            SimTool tool;
            tool.card = card_from_json(s.at("card"));
            tool.role = role_from_string(s.at("role").get<std::string>());
            tool.expects = s.at("expects").get<std::map<std::string, std::string>>();
            tool.produces = s.at("produces").get<std::map<std::string, std::string>>();
            t.tools.push_back(std::move(tool));
        }
        for (const auto& g : j.at("gold_plan")) {
            t.gold_plan.push_back({g.at("tool").get<std::string>(), g.at("deps").get<std::vector<std::size_t>>()});
        }
        if (t.gold_plan.empty()) {
            throw SuiteParseError("task " + t.task_id + " has an empty gold plan");
        }
        if (j.contains("goal") && j["goal"].value("tool_succeeds", t.answer_tool()) != t.answer_tool()) {
            throw SuiteParseError("task " + t.task_id + ": goal tool must be the last gold step");
        }
        t.planted_count = j.value("planted_count", 0);
        const auto& d = j.at("difficulty");
        t.difficulty = {d.at("chain_depth").get<int>(), d.at("branching").get<int>(), d.at("distractors").get<int>()};
        t.seed = j.value("seed", std::uint64_t{0});
        t.index = j.value("index", std::size_t{0});
        for (const auto& g : t.gold_plan) {
            if (!t.tool(g.tool)) {
                throw SuiteParseError("task " + t.task_id + ": gold step " + g.tool + " has no tool");
            }
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw SuiteParseError(std::string("malformed task: ") + e.what());
    } catch (const InvalidCard& e) {
        throw SuiteParseError(std::string("malformed tool card: ") + e.what());
    }
}

inline void write_suite(const std::vector<SyntheticTask>& tasks, std::ostream& out)
{
    for (const auto& t : tasks) {
        out << task_to_json(t).dump() << '\n';
    }
}

inline void save_suite(const std::vector<SyntheticTask>& tasks, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw IoFailure("cannot write suite " + path);
    }
    write_suite(tasks, out);
    if (!out) {
        throw IoFailure("write failed for " + path);
    }
}

inline std::vector<SyntheticTask> read_suite(std::istream& in)
{
    std::vector<SyntheticTask> tasks;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw SuiteParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
        tasks.push_back(task_from_json(j));
    }
    return tasks;
}

inline std::vector<SyntheticTask> load_suite(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw SuiteParseError("cannot open suite " + path);
    }
    return read_suite(in);
}

} // namespace tooltree::sim
