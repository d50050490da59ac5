#pragma once

#include <tooltree/evaluation/evaluator.hpp>
#include <tooltree/registry.hpp>
#include <tooltree/search/execution.hpp>
#include <tooltree/search/task.hpp>

#include <functional>
#include <map>
#include <string>

namespace testing_support {

using namespace tooltree;

inline ToolCard make_card(std::string name, std::vector<InputField> in, std::vector<OutputField> out,
                          std::string desc = "tool")
{
    ToolCard c;
    c.name = std::move(name);
    c.description = std::move(desc);
    c.inputs = std::move(in);
    c.outputs = std::move(out);
    return c;
}

inline ToolOutput one(const std::string& field, SchemaType type, nlohmann::json v)
{
    ToolOutput o;
    o.payload[field] = TypedValue{std::move(type), std::move(v)};
    return o;
}

/// Fixed per-tool scores; unknown tools get `fallback`. Error outputs score 0.
struct ScriptedJudge : Evaluator {
    std::map<std::string, double> pre;
    std::map<std::string, double> post;
    double fallback = 0.5;
    int pre_calls = 0;
    int post_calls = 0;

    double score_pre(const PreRequest& r) override
    {
        ++pre_calls;
        auto it = pre.find(r.card.name);
        return it == pre.end() ? fallback : it->second;
    }
    double score_post(const PostRequest& r) override
    {
        ++post_calls;
        if (!r.output.ok()) {
            return 0.0;
        }
        auto it = post.find(r.card.name);
        return it == post.end() ? fallback : it->second;
    }
};

/// Executes by dispatching on tool name; counts real invocations.
struct ScriptedExecutor : Executor {
    using Fn = std::function<ToolOutput(const ToolCard&, const ArgumentDraft&, const Context&)>;
    std::map<std::string, Fn> tools;
    int invocations = 0;

    ToolOutput execute(const ToolCard& card, const ArgumentDraft& args, const Context& ctx) override
    {
        ++invocations;
        auto it = tools.find(card.name);
        if (it != tools.end()) {
            return it->second(card, args, ctx);
        }
        ToolOutput o;
        for (const auto& f : card.outputs) {
            o.payload[f.name] = TypedValue{f.type, card.name + ":" + f.name};
        }
        return o;
    }
};

// Linear chain t1 -> t2 -> ... where each tool consumes the previous tool's unique
// output type. Post scores climb until `rising` then drop to a flat 0.5, so the best
// Q in the tree freezes after rollout `rising`.
struct FrozenChain {
    ToolRegistry registry;
    ScriptedJudge judge;
    ScriptedExecutor exec;
    SearchTask task;

    explicit FrozenChain(int rising = 12, int length = 40, double step = 0.04)
    {
        std::vector<ToolCard> cards;
        auto link = [](int i) { return SchemaType::structured({{"k" + std::to_string(i), SchemaType::text()}}); };
        for (int i = 1; i <= length; ++i) {
            auto name = "t" + std::to_string(i);
            auto in = i == 1 ? SchemaType::text() : link(i - 1);
            cards.push_back(make_card(name, {{"x", in}}, {{"y", link(i)}}));
            judge.pre[name] = 0.9;
            judge.post[name] = i <= rising ? 0.4 + step * i : 0.5;
        }
        registry = make_registry(cards);
        task.id = "frozen";
        task.initial.query = "q";
        task.goal = [](const Context&) { return false; };
    }
};

} // namespace testing_support
