#pragma once

#include <tooltree/context.hpp>
#include <tooltree/search/tree.hpp>

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace tooltree {

enum class StopReason { budget, early_stop, tree_exhausted };

inline const char* to_string(StopReason r)
{
    switch (r) {
    case StopReason::budget: return "budget";
    case StopReason::early_stop: return "early_stop";
    case StopReason::tree_exhausted: return "tree_exhausted";
    }
    return "?";
}

struct TracePoint {
    std::size_t rollout = 0;
    double best_value = 0.0;
    double seconds = 0.0;
    bool operator==(const TracePoint&) const = default;
};

struct TrajectoryStep {
    Action action;
    ToolOutput output;
    double r_post = 0.0;
    double q = 0.0;
    bool operator==(const TrajectoryStep&) const = default;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    double value = 0.0;
    NodeId leaf = 0;
    Context context;
};

struct SearchResult {
    std::vector<TrajectoryStep> trajectory;
    double best_value = 0.0;
    std::size_t rollouts_used = 0;
    std::size_t nodes_expanded = 0;
    StopReason stop_reason = StopReason::budget;
    std::vector<TracePoint> trace;
    std::vector<SearchEvent> events;
    SearchCounters counters;
    double seconds = 0.0;
    bool goal_reached = false;
    Context final_context;

    std::size_t judge_calls() const { return counters.pre_calls + counters.post_calls; }
    bool operator==(const SearchResult&) const = default;
};

inline nlohmann::json trajectory_to_json(const std::vector<TrajectoryStep>& steps)
{
    auto arr = nlohmann::json::array();
    for (const auto& s : steps) {
        arr.push_back({{"tool", s.action.tool},
                       {"args", draft_to_json(s.action.draft)},
                       {"output", output_to_json(s.output)},
                       {"r_post", s.r_post},
                       {"q", s.q}});
    }
    return arr;
}

inline nlohmann::json result_to_json(const SearchResult& r, bool with_events = true)
{
    nlohmann::json j{{"best_trajectory", trajectory_to_json(r.trajectory)},
                     {"best_value", r.best_value},
                     {"rollouts_used", r.rollouts_used},
                     {"nodes_expanded", r.nodes_expanded},
                     {"stop_reason", to_string(r.stop_reason)},
                     {"goal_reached", r.goal_reached},
                     {"seconds", r.seconds},
                     {"counters",
                      {{"pre_calls", r.counters.pre_calls},
                       {"post_calls", r.counters.post_calls},
                       {"executor_calls", r.counters.executor_calls},
                       {"cache_hits", r.counters.cache_hits},
                       {"expansions", r.counters.expansions}}}};
    auto trace = nlohmann::json::array();
    for (const auto& t : r.trace) {
        trace.push_back({t.rollout, t.best_value, t.seconds});
    }
    j["trace"] = std::move(trace);
    if (with_events) {
        auto ev = nlohmann::json::array();
        for (const auto& e : r.events) {
            ev.push_back(event_to_json(e));
        }
        j["events"] = std::move(ev);
    }
    return j;
}

} // namespace tooltree
