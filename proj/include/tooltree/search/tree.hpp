#pragma once

#include <tooltree/context.hpp>

#include <nlohmann/json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace tooltree {

using NodeId = std::size_t;

struct Action {
    std::string tool;
    ArgumentDraft draft;
    bool operator==(const Action&) const = default;
};

/// One tree node. The incoming edge's statistics (N, Q, prior) live on the child.
///
/// Visit convention: N(v) = self_visits(v) + sum of N over v's children, where a
/// self visit is a rollout whose reward was produced at v itself (its first
/// execution, or a replay of a terminal node). The root never produces a reward,
/// so N(root) is exactly the sum over its children.
struct SearchNode {
    NodeId id = 0;
    std::optional<NodeId> parent;
    std::optional<Action> action;
    Context context; ///< before execution: the parent's context; after: with this call appended
    std::size_t visits = 0;
    std::size_t self_visits = 0;
    double value = 0.0;
    double prior = 1.0;
    std::optional<double> last_post;
    std::optional<ToolOutput> output;
    bool expandable = true;
    bool terminal = false;
    bool executed = false;
    bool post_pruned = false;
    std::vector<NodeId> children;
    int depth = 0;
};

enum class EventKind { expand, add_child, prune_pre, exhausted, execute, score_post, prune_post, backprop, replay };

inline const char* to_string(EventKind k)
{
    switch (k) {
    case EventKind::expand: return "expand";
    case EventKind::add_child: return "add_child";
    case EventKind::prune_pre: return "prune_pre";
    case EventKind::exhausted: return "exhausted";
    case EventKind::execute: return "execute";
    case EventKind::score_post: return "score_post";
    case EventKind::prune_post: return "prune_post";
    case EventKind::backprop: return "backprop";
    case EventKind::replay: return "replay";
    }
    return "?";
}

/// Log line. `node` is the subject; `other` the parent for add_child/prune_pre.
struct SearchEvent {
    std::size_t rollout = 0;
    EventKind kind = EventKind::expand;
    NodeId node = 0;
    std::optional<NodeId> other;
    std::string tool;
    double value = 0.0;
    bool flag = false; ///< execute: cache hit
    bool operator==(const SearchEvent&) const = default;
};

struct SearchCounters {
    std::size_t pre_calls = 0;
    std::size_t post_calls = 0;
    std::size_t executor_calls = 0;
    std::size_t cache_hits = 0;
    std::size_t expansions = 0;
    bool operator==(const SearchCounters&) const = default;
};

struct SearchTree {
    std::vector<SearchNode> nodes;
    std::vector<SearchEvent> events;
    SearchCounters counters;
    std::size_t rollout = 0; ///< index stamped on new events

    explicit SearchTree(Context initial = {})
    {
        SearchNode root;
        root.context = std::move(initial);
        root.executed = true;
        nodes.push_back(std::move(root));
    }

    SearchNode& root() { return nodes.front(); }
    const SearchNode& root() const { return nodes.front(); }
    SearchNode& operator[](NodeId id) { return nodes.at(id); }
    const SearchNode& operator[](NodeId id) const { return nodes.at(id); }

    /// Child count excluding the root.
    std::size_t created() const { return nodes.size() - 1; }

    void log(EventKind kind, NodeId node, std::optional<NodeId> other = {}, std::string tool = {}, double value = 0.0,
             bool flag = false)
    {
        events.push_back(SearchEvent{rollout, kind, node, other, std::move(tool), value, flag});
    }
};

inline nlohmann::json event_to_json(const SearchEvent& e)
{
    nlohmann::json j{{"rollout", e.rollout}, {"kind", to_string(e.kind)}, {"node", e.node}};
    if (e.other) {
        j["parent"] = *e.other;
    }
    if (!e.tool.empty()) {
        j["tool"] = e.tool;
    }
    switch (e.kind) {
    case EventKind::add_child:
    case EventKind::prune_pre:
    case EventKind::score_post:
    case EventKind::backprop:
    case EventKind::replay:
        j["value"] = e.value;
        break;
    case EventKind::execute:
        j["cache_hit"] = e.flag;
        break;
    default:
        break;
    }
    return j;
}

} // namespace tooltree
