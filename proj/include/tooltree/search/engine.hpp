#pragma once

#include <tooltree/drafting.hpp>
#include <tooltree/errors.hpp>
#include <tooltree/evaluation/evaluator.hpp>
#include <tooltree/registry.hpp>
#include <tooltree/search/actions.hpp>
#include <tooltree/search/config.hpp>
#include <tooltree/search/execution.hpp>
#include <tooltree/search/result.hpp>
#include <tooltree/search/task.hpp>
#include <tooltree/search/tree.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace tooltree {

struct SearchHooks {
    CostModel cost;
    /// Called after every completed rollout with the tree and the rollout count.
    std::function<void(const SearchTree&, std::size_t)> on_rollout;
};

/// Seeded tie-break jitter in [0, magnitude).
class Jitter {
public:
    explicit Jitter(std::uint64_t seed) : rng_(seed) {}
    double draw(double magnitude) { return static_cast<double>(rng_() >> 11) * 0x1.0p-53 * magnitude; }

private:
    std::mt19937_64 rng_;
};

inline double uct_score(const SearchNode& child, std::size_t parent_n, double lambda)
{
    if (child.visits == 0) {
        return std::numeric_limits<double>::infinity();
    }
    double n_parent = static_cast<double>(std::max<std::size_t>(parent_n, 1));
    return child.value + lambda * child.prior * std::sqrt(std::log(n_parent) / static_cast<double>(child.visits));
}

inline double anneal_lambda(double lambda, int depth, const SearchConfig& config)
{
    if (!config.anneal_lambda || depth <= 0) {
        return lambda;
    }
    return lambda * std::pow(*config.anneal_lambda, depth);
}

/// Children selection may enter: still growable, or a completed terminal that
/// passed post-evaluation. Unvisited children are always expandable.
inline bool selectable(const SearchNode& n)
{
    return n.expandable || (n.terminal && !n.post_pruned);
}

/// Picks among `candidates` (all children of `parent`) by UCT, then larger N, then jitter.
inline NodeId select_child(const SearchTree& tree, const SearchNode& parent, const std::vector<NodeId>& candidates,
                           const SearchConfig& config, Jitter& jitter)
{
    double lambda = anneal_lambda(config.lambda, parent.depth, config);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<NodeId> tied;
    for (NodeId c : candidates) {
        double s = uct_score(tree[c], parent.visits, lambda);
        if (s > best) {
            best = s;
            tied.assign(1, c);
        } else if (s == best) {
            tied.push_back(c);
        }
    }
    if (tied.size() > 1) {
        std::size_t most = 0;
        for (NodeId c : tied) {
            most = std::max(most, tree[c].visits);
        }
        std::erase_if(tied, [&](NodeId c) { return tree[c].visits != most; });
    }
    if (tied.size() == 1) {
        return tied.front();
    }
    NodeId pick = tied.front();
    double top = -1.0;
    for (NodeId c : tied) {
        double j = jitter.draw(config.jitter_magnitude);
        if (j > top) {
            top = j;
            pick = c;
        }
    }
    return pick;
}

/// Descends from the root to a leaf, a terminal node, or a node none of whose
/// children can be entered (returned so the caller can retire it).
inline NodeId select_path(const SearchTree& tree, const SearchConfig& config, Jitter& jitter)
{
    const auto& root = tree.root();
    auto eligible_of = [&](const SearchNode& n) {
        std::vector<NodeId> out;
        for (NodeId c : n.children) {
            if (selectable(tree[c])) {
                out.push_back(c);
            }
        }
        return out;
    };
    if (root.terminal || (!root.expandable && eligible_of(root).empty())) {
        throw TreeExhausted("root has nothing left to explore");
    }
    NodeId at = 0;
    while (true) {
        const auto& node = tree[at];
        if ((node.terminal && at != 0) || node.children.empty()) {
            return at;
        }
        auto eligible = eligible_of(node);
        if (eligible.empty()) {
            return at;
        }
        at = select_child(tree, node, eligible, config, jitter);
    }
}

namespace detail {

struct Candidate {
    const ToolCard* card;
    ArgumentDraft draft;
    double prior;
};

} // namespace detail

/// Scores the admissible actions not yet tried at `leaf`, keeps the top-K of those
/// at or above tau_pre, and adds them as unvisited children. Returns the new ids
/// in prior order. An empty keep set retires the leaf.
inline std::vector<NodeId> expand(SearchTree& tree, NodeId leaf, const ToolRegistry& registry, Evaluator& evaluator,
                                  const SearchConfig& config)
{
    if (!tree[leaf].expandable) {
        throw Error("expand called on a non-expandable node");
    }
    if (tree[leaf].depth >= config.max_depth) {
        throw Error("expand called at max depth");
    }
    const Context ctx = tree[leaf].context;
    std::set<std::string> existing;
    for (NodeId c : tree[leaf].children) {
        existing.insert(tree[c].action->tool);
    }
    std::vector<detail::Candidate> cands;
    for (auto& a : admissible_actions(ctx, registry, existing)) {
        double prior = 1.0;
        if (config.use_pre_eval) {
            ++tree.counters.pre_calls;
            prior = score_pre(PreRequest{ctx, *a.card, a.draft}, evaluator);
        }
        cands.push_back({a.card, std::move(a.draft), prior});
    }
    std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
        if (a.prior != b.prior) {
            return a.prior > b.prior;
        }
        return a.card->name < b.card->name;
    });

    ++tree.counters.expansions;
    tree.log(EventKind::expand, leaf);
    std::vector<NodeId> added;
    for (auto& c : cands) {
        if (c.prior < config.tau_pre || added.size() >= config.top_k) {
            tree.log(EventKind::prune_pre, leaf, leaf, c.card->name, c.prior);
            continue;
        }
        SearchNode child;
        child.id = tree.nodes.size();
        child.parent = leaf;
        child.action = Action{c.card->name, std::move(c.draft)};
        child.context = ctx;
        child.prior = c.prior;
        child.depth = tree[leaf].depth + 1;
        tree.log(EventKind::add_child, child.id, leaf, c.card->name, c.prior);
        tree[leaf].children.push_back(child.id);
        added.push_back(child.id);
        tree.nodes.push_back(std::move(child));
    }
    if (added.empty()) {
        tree[leaf].expandable = false;
        tree.log(EventKind::exhausted, leaf);
    }
    return added;
}

/// Runs the child's action against its parent's context through the cache and
/// records the output on the child.
inline const ToolOutput& execute_action(SearchTree& tree, NodeId child, const ToolRegistry& registry,
                                        Executor& executor, ExecutionCache& cache)
{
    auto& node = tree[child];
    if (!node.action || !node.parent) {
        throw Error("execute_action on the root");
    }
    const auto& card = registry.at(node.action->tool);
    const Context& before = tree[*node.parent].context;
    auto call = call_through_cache(card, node.action->draft, before, executor, cache);
    if (call.cache_hit) {
        ++tree.counters.cache_hits;
    } else {
        ++tree.counters.executor_calls;
    }
    auto& n = tree[child];
    n.context = before.with(HistoryEntry{n.action->tool, n.action->draft, call.output});
    n.output = std::move(call.output);
    n.executed = true;
    tree.log(EventKind::execute, child, {}, n.action->tool, 0.0, call.cache_hit);
    return *n.output;
}

inline void backpropagate(SearchTree& tree, NodeId child, double r_post)
{
    std::optional<NodeId> at = child;
    while (at) {
        auto& n = tree[*at];
        ++n.visits;
        n.value += (r_post - n.value) / static_cast<double>(n.visits);
        at = n.parent;
    }
    ++tree[child].self_visits;
    tree.log(EventKind::backprop, child, {}, {}, r_post);
}

/// Strict threshold: a score equal to tau_post keeps the edge.
inline bool apply_post_pruning(SearchNode& child, double r_post, const SearchConfig& config)
{
    if (r_post < config.tau_post) {
        child.expandable = false;
        child.post_pruned = true;
        return true;
    }
    return false;
}

inline bool should_stop(std::span<const TracePoint> trace, const SearchConfig& config, bool exhausted = false)
{
    if (exhausted || trace.size() >= static_cast<std::size_t>(config.r_max)) {
        return true;
    }
    auto w = static_cast<std::size_t>(config.early_stop_window);
    if (trace.size() < w + 1) {
        return false;
    }
    for (std::size_t i = trace.size() - w; i < trace.size(); ++i) {
        if (trace[i].best_value - trace[i - 1].best_value >= config.early_stop_epsilon) {
            return false;
        }
    }
    return true;
}

/// Root-to-leaf path over executed nodes with the highest mean edge Q. Ties go to
/// the higher last-edge Q, then the shorter path, then the smaller tool-name list.
inline Trajectory best_trajectory(const SearchTree& tree)
{
    struct Best {
        std::vector<NodeId> path;
        double mean = -1.0;
        double last = -1.0;
        std::vector<std::string> names;
    };
    std::optional<Best> best;
    std::vector<NodeId> path;
    double sum = 0.0;

    std::function<void(NodeId)> walk = [&](NodeId id) {
        const auto& n = tree[id];
        bool has_executed_child = false;
        for (NodeId c : n.children) {
            if (tree[c].executed) {
                has_executed_child = true;
                path.push_back(c);
                sum += tree[c].value;
                walk(c);
                sum -= tree[c].value;
                path.pop_back();
            }
        }
        if (has_executed_child || path.empty()) {
            return;
        }
        Best b{path, sum / static_cast<double>(path.size()), n.value, {}};
        for (NodeId p : path) {
            b.names.push_back(tree[p].action->tool);
        }
        bool better = !best;
        if (!better) {
            constexpr double eps = 1e-12;
            if (std::abs(b.mean - best->mean) > eps) better = b.mean > best->mean;
            else if (std::abs(b.last - best->last) > eps) better = b.last > best->last;
            else if (b.path.size() != best->path.size()) better = b.path.size() < best->path.size();
            else better = b.names < best->names;
        }
        if (better) {
            best = std::move(b);
        }
    };
    walk(0);
    if (!best) {
        throw EmptyTree("no executed nodes");
    }
    Trajectory t;
    t.value = best->mean;
    t.leaf = best->path.back();
    t.context = tree[t.leaf].context;
    for (NodeId p : best->path) {
        const auto& n = tree[p];
        t.steps.push_back(TrajectoryStep{*n.action, *n.output, n.last_post.value_or(0.0), n.value});
    }
    return t;
}

namespace detail {

/// Largest edge Q anywhere in the tree.
inline double global_best_q(const SearchTree& tree)
{
    double best = 0.0;
    for (NodeId id = 1; id < tree.nodes.size(); ++id) {
        if (tree[id].visits > 0) {
            best = std::max(best, tree[id].value);
        }
    }
    return best;
}

} // namespace detail

/// One search session: tree, cache, and RNG live for a single run.
class SearchSession {
public:
    SearchSession(const SearchTask& task, const ToolRegistry& registry, Evaluator& evaluator, Executor& executor,
                  const SearchConfig& config, SearchHooks hooks = {})
        : task_(task), registry_(registry), evaluator_(evaluator), executor_(executor), config_(config),
          hooks_(std::move(hooks)), tree_(task.initial), jitter_(config.seed)
    {
        config_.validate();
        if (registry_.empty()) {
            throw InvalidConfig("empty registry");
        }
        tree_.root().terminal = reached_goal(task_.initial);
    }

    SearchResult run()
    {
        StopReason reason = StopReason::budget;
        while (true) {
            if (trace_.size() >= static_cast<std::size_t>(config_.r_max)) {
                reason = StopReason::budget;
                break;
            }
            if (should_stop(trace_, config_)) {
                reason = StopReason::early_stop;
                break;
            }
            NodeId leaf = 0;
            try {
                leaf = select_path(tree_, config_, jitter_);
            } catch (const TreeExhausted&) {
                reason = StopReason::tree_exhausted;
                break;
            }
            tree_.rollout = trace_.size() + 1;
            if (step(leaf)) {
                double best = detail::global_best_q(tree_);
                if (!trace_.empty()) {
                    best = std::max(best, trace_.back().best_value);
                }
                trace_.push_back(TracePoint{trace_.size() + 1, best, hooks_.cost.seconds(tree_.counters)});
                if (hooks_.on_rollout) {
                    hooks_.on_rollout(tree_, trace_.size());
                }
            }
        }
        return finish(reason);
    }

    const SearchTree& tree() const { return tree_; }
    const ExecutionCache& cache() const { return cache_; }

private:
    bool reached_goal(const Context& ctx) const { return task_.goal && task_.goal(ctx); }

    /// Advances one rollout from `leaf`. Returns false when the step only retired a
    /// node and no reward was produced.
    bool step(NodeId leaf)
    {
        auto& node = tree_[leaf];
        if (node.terminal && leaf != 0) {
            double r = node.last_post.value_or(0.0);
            tree_.log(EventKind::replay, leaf, {}, node.action->tool, r);
            backpropagate(tree_, leaf, r);
            return true;
        }
        if (!node.executed) {
            evaluate(leaf);
            return true;
        }
        if (!node.children.empty() || !node.expandable) {
            // every child is closed: retire this node
            tree_[leaf].expandable = false;
            tree_.log(EventKind::exhausted, leaf);
            return false;
        }
        auto added = expand(tree_, leaf, registry_, evaluator_, config_);
        if (added.empty()) {
            return false;
        }
        evaluate(added.front());
        return true;
    }

    void evaluate(NodeId id)
    {
        const auto& output = execute_action(tree_, id, registry_, executor_, cache_);
        auto& node = tree_[id];
        bool goal = reached_goal(node.context);
        node.terminal = goal || node.depth >= config_.max_depth;
        ++tree_.counters.post_calls;
        double r;
        if (config_.use_post_eval) {
            const auto& card = registry_.at(node.action->tool);
            r = score_post(PostRequest{tree_[*node.parent].context, card, node.action->draft, output}, evaluator_);
        } else {
            r = goal ? 1.0 : 0.0;
        }
        auto& n = tree_[id];
        n.last_post = r;
        tree_.log(EventKind::score_post, id, {}, n.action->tool, r);
        if (config_.use_post_eval && apply_post_pruning(n, r, config_)) {
            tree_.log(EventKind::prune_post, id, {}, n.action->tool, r);
        }
        backpropagate(tree_, id, r);
    }

    SearchResult finish(StopReason reason)
    {
        SearchResult out;
        out.stop_reason = reason;
        out.rollouts_used = trace_.size();
        out.nodes_expanded = tree_.created();
        out.trace = trace_;
        out.events = tree_.events;
        out.counters = tree_.counters;
        out.seconds = hooks_.cost.seconds(tree_.counters);
        try {
            auto t = best_trajectory(tree_);
            out.trajectory = std::move(t.steps);
            out.best_value = t.value;
            out.final_context = std::move(t.context);
        } catch (const EmptyTree&) {
            out.final_context = task_.initial;
        }
        out.goal_reached = reached_goal(out.final_context);
        return out;
    }

    const SearchTask& task_;
    const ToolRegistry& registry_;
    Evaluator& evaluator_;
    Executor& executor_;
    SearchConfig config_;
    SearchHooks hooks_;
    SearchTree tree_;
    Jitter jitter_;
    ExecutionCache cache_;
    std::vector<TracePoint> trace_;
};

inline SearchResult run_search(const SearchTask& task, const ToolRegistry& registry, Evaluator& evaluator,
                               Executor& executor, const SearchConfig& config, SearchHooks hooks = {})
{
    return SearchSession(task, registry, evaluator, executor, config, std::move(hooks)).run();
}

} // namespace tooltree
