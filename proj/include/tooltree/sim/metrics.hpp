#pragma once

#include <tooltree/drafting.hpp>
#include <tooltree/search/result.hpp>
#include <tooltree/sim/task.hpp>

#include <algorithm>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace tooltree::sim {

struct Metrics {
    bool success = false;
    double tool_f1 = 0.0;
    double arg_f1 = 0.0;
    double plan_f1 = 0.0;
    double exec_f1 = 0.0;
    double pass = 0.0;
    bool operator==(const Metrics&) const = default;
};

template <class T>
double set_f1(const std::set<T>& predicted, const std::set<T>& gold)
{
    if (predicted.empty() || gold.empty()) {
        return 0.0;
    }
    std::size_t hit = 0;
    for (const auto& p : predicted) {
        hit += gold.count(p);
    }
    if (hit == 0) {
        return 0.0;
    }
    double precision = static_cast<double>(hit) / static_cast<double>(predicted.size());
    double recall = static_cast<double>(hit) / static_cast<double>(gold.size());
    return 2 * precision * recall / (precision + recall);
}

inline std::set<std::pair<std::string, std::string>> ordered_pairs(const std::vector<std::string>& seq)
{
    std::set<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        for (std::size_t j = i + 1; j < seq.size(); ++j) {
            if (seq[i] != seq[j]) {
                out.emplace(seq[i], seq[j]);
            }
        }
    }
    return out;
}

/// Every topological order of the gold DAG, as tool-name sequences.
inline std::vector<std::vector<std::string>> topological_orders(const SyntheticTask& task)
{
    const auto& steps = task.gold_plan;
    std::vector<std::vector<std::string>> out;
    std::vector<std::string> cur;
    std::vector<bool> used(steps.size(), false);
    std::function<void()> rec = [&] {
        if (cur.size() == steps.size()) {
            out.push_back(cur);
            return;
        }
        for (std::size_t i = 0; i < steps.size(); ++i) {
            if (used[i]) continue;
            if (!std::all_of(steps[i].deps.begin(), steps[i].deps.end(), [&](auto k) { return used[k]; })) continue;
            used[i] = true;
            cur.push_back(steps[i].tool);
            rec();
            cur.pop_back();
            used[i] = false;
        }
    };
    rec();
    return out;
}

/// Scores an executed trajectory against the task's gold plan.
///  - tool F1: set of tool names called vs gold tool names
///  - argument F1: (tool, field, canonical resolved value) triples vs the gold bindings
///  - plan F1: ordered tool pairs vs the best-matching topological order of the gold DAG
///  - execution F1: tools that ran without an error token vs gold tools
inline Metrics evaluate_success(const SyntheticTask& task, const std::vector<TrajectoryStep>& trajectory)
{
    Metrics m;
    if (trajectory.empty()) {
        return m;
    }
    Context ctx = task.initial_context();
    std::vector<std::string> called;
    std::set<std::string> tools, ran_ok;
    std::set<std::string> args;
    for (const auto& step : trajectory) {
        const auto& name = step.action.tool;
        called.push_back(name);
        tools.insert(name);
        if (step.output.ok()) {
            ran_ok.insert(name);
        }
        for (const auto& [field, binding] : step.action.draft.bindings) {
            auto v = resolve(binding, ctx);
            args.insert(nlohmann::json::array({name, field, v.value_or(nlohmann::json())}).dump());
        }
        ctx = ctx.with({name, step.action.draft, step.output});
    }

    std::set<std::string> gold_tools, gold_args;
    for (const auto& g : task.gold_plan) {
        gold_tools.insert(g.tool);
        for (const auto& [field, value] : task.tool(g.tool)->expects) {
            gold_args.insert(nlohmann::json::array({g.tool, field, value}).dump());
        }
    }
    m.tool_f1 = set_f1(tools, gold_tools);
    m.arg_f1 = set_f1(args, gold_args);
    m.exec_f1 = set_f1(ran_ok, gold_tools);

    auto predicted_pairs = ordered_pairs(called);
    for (const auto& order : topological_orders(task)) {
        m.plan_f1 = std::max(m.plan_f1, set_f1(predicted_pairs, ordered_pairs(order)));
    }
    if (task.gold_plan.size() == 1) {
        // no pairs to compare: ordering is trivially right when the one gold tool was called
        m.plan_f1 = tools.count(task.gold_plan.front().tool) ? set_f1(tools, gold_tools) : 0.0;
    }
    m.success = task.goal_satisfied(ctx);
    m.pass = m.success ? 1.0 : 0.0;
    return m;
}

} // namespace tooltree::sim
