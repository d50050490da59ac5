#pragma once

#include <tooltree/evaluation/evaluator.hpp>
#include <tooltree/registry.hpp>
#include <tooltree/search/actions.hpp>
#include <tooltree/search/engine.hpp>
#include <tooltree/search/execution.hpp>
#include <tooltree/search/result.hpp>
#include <tooltree/search/task.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

namespace tooltree {

enum class BaselineKind { greedy_reactive, best_first, dfs_backtrack, vanilla_mcts };

inline const char* to_string(BaselineKind k)
{
    switch (k) {
    case BaselineKind::greedy_reactive: return "greedy";
    case BaselineKind::best_first: return "best_first";
    case BaselineKind::dfs_backtrack: return "dfs";
    case BaselineKind::vanilla_mcts: return "vanilla_mcts";
    }
    return "?";
}

/// Knobs the non-tree baselines share with the engine.
struct BaselineOptions {
    int max_depth = 8;
    double tau_post = 0.4; ///< dfs failure threshold
    std::uint64_t seed = 0;
    CostModel cost;
};

namespace detail {

struct Scored {
    const ToolCard* card;
    ArgumentDraft draft;
    double prior;
};

inline std::vector<Scored> scored_actions(const Context& ctx, const ToolRegistry& registry, Evaluator& evaluator,
                                          SearchCounters& counters)
{
    std::vector<Scored> out;
    for (auto& a : admissible_actions(ctx, registry)) {
        ++counters.pre_calls;
        double p = score_pre(PreRequest{ctx, *a.card, a.draft}, evaluator);
        out.push_back({a.card, std::move(a.draft), p});
    }
    std::stable_sort(out.begin(), out.end(), [](const Scored& a, const Scored& b) {
        if (a.prior != b.prior) return a.prior > b.prior;
        return a.card->name < b.card->name;
    });
    return out;
}

/// Cached call with counter bookkeeping; returns the new context.
inline Context run_step(const ToolCard& card, const ArgumentDraft& draft, const Context& ctx, Executor& executor,
                        ExecutionCache& cache, SearchCounters& counters)
{
    auto call = call_through_cache(card, draft, ctx, executor, cache);
    if (call.cache_hit) {
        ++counters.cache_hits;
    } else {
        ++counters.executor_calls;
    }
    return ctx.with({card.name, draft, std::move(call.output)});
}

inline double mean_of(const std::vector<TrajectoryStep>& steps, double TrajectoryStep::*field)
{
    if (steps.empty()) {
        return 0.0;
    }
    double s = 0;
    for (const auto& st : steps) {
        s += st.*field;
    }
    return s / static_cast<double>(steps.size());
}

} // namespace detail

/// ReAct-style: take the highest-prior admissible call, execute, repeat. Never
/// backtracks. `budget` counts steps.
inline SearchResult run_greedy(const SearchTask& task, const ToolRegistry& registry, Evaluator& evaluator,
                               Executor& executor, int budget, const BaselineOptions& opt = {})
{
    if (budget < 1) {
        throw InvalidConfig("greedy budget must be >= 1");
    }
    SearchResult r;
    ExecutionCache cache;
    Context ctx = task.initial;
    r.stop_reason = StopReason::budget;
    while (true) {
        if (task.goal && task.goal(ctx)) {
            r.stop_reason = StopReason::early_stop;
            break;
        }
        if (r.rollouts_used >= static_cast<std::size_t>(budget)) {
            r.stop_reason = StopReason::budget;
            break;
        }
        if (static_cast<int>(ctx.history.size()) >= opt.max_depth) {
            r.stop_reason = StopReason::tree_exhausted;
            break;
        }
        auto cands = detail::scored_actions(ctx, registry, evaluator, r.counters);
        r.nodes_expanded += cands.size();
        ++r.counters.expansions;
        if (cands.empty()) {
            r.stop_reason = StopReason::tree_exhausted;
            break;
        }
        const auto& best = cands.front();
        ctx = detail::run_step(*best.card, best.draft, ctx, executor, cache, r.counters);
        r.trajectory.push_back({Action{best.card->name, best.draft}, ctx.history.back().output, 0.0, best.prior});
        ++r.rollouts_used;
        r.trace.push_back({r.rollouts_used, detail::mean_of(r.trajectory, &TrajectoryStep::q),
                           opt.cost.seconds(r.counters)});
    }
    r.best_value = detail::mean_of(r.trajectory, &TrajectoryStep::q);
    r.final_context = ctx;
    r.goal_reached = task.goal && task.goal(ctx);
    r.seconds = opt.cost.seconds(r.counters);
    return r;
}

/// Best-first over hypothetical plans: partial paths are ranked by mean prior and
/// extended without executing anything (outputs are typed placeholders). A path
/// that reaches the goal or the depth limit is executed for real; on failure the
/// search goes on. Each expansion after the root's costs one unit of `budget`, and
/// real executor calls are capped by the same budget.
inline SearchResult run_best_first(const SearchTask& task, const ToolRegistry& registry, Evaluator& evaluator,
                                   Executor& executor, int budget, const BaselineOptions& opt = {})
{
    if (budget < 1) {
        throw InvalidConfig("best-first budget must be >= 1");
    }
    struct Entry {
        std::vector<std::pair<Action, double>> steps;
        Context hypothetical;
        double prior_sum = 0;
        double jitter = 0;
    };
    auto key = [](const Entry& e) {
        double mean = e.steps.empty() ? 2.0 : e.prior_sum / static_cast<double>(e.steps.size());
        return std::make_tuple(std::llround(mean * 1e9), e.steps.size(), e.jitter);
    };
    auto worse = [&](const Entry& a, const Entry& b) { return key(a) < key(b); };

    SearchResult r;
    ExecutionCache cache;
    std::mt19937_64 rng(opt.seed);
    auto jitter = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    auto goal = [&](const Context& c) { return task.goal && task.goal(c); };

    std::vector<Entry> heap;
    heap.push_back(Entry{{}, task.initial, 0.0, 0.0});
    std::size_t expansions = 0;
    std::optional<std::vector<TrajectoryStep>> executed;
    Context executed_ctx = task.initial;
    std::set<std::string> tried;

    auto execute_path = [&](const Entry& e) {
        std::vector<TrajectoryStep> steps;
        Context ctx = task.initial;
        for (const auto& [action, prior] : e.steps) {
            if (r.counters.executor_calls >= static_cast<std::size_t>(budget)) {
                break;
            }
            ctx = detail::run_step(registry.at(action.tool), action.draft, ctx, executor, cache, r.counters);
            steps.push_back({action, ctx.history.back().output, 0.0, prior});
            if (!ctx.history.back().output.ok()) {
                break;
            }
        }
        executed = steps;
        executed_ctx = ctx;
        return goal(ctx);
    };
    auto path_key = [](const Entry& e) {
        std::string k;
        for (const auto& [a, _] : e.steps) {
            k += canonical_cache_key(a.tool, a.draft) + ";";
        }
        return k;
    };

    bool solved = false;
    r.stop_reason = StopReason::tree_exhausted;
    while (!heap.empty()) {
        std::pop_heap(heap.begin(), heap.end(), worse);
        Entry e = std::move(heap.back());
        heap.pop_back();
        bool terminal = !e.steps.empty()
                        && (goal(e.hypothetical) || static_cast<int>(e.steps.size()) >= opt.max_depth);
        if (terminal) {
            tried.insert(path_key(e));
            if (execute_path(e)) {
                solved = true;
                r.stop_reason = StopReason::early_stop;
                break;
            }
            if (r.counters.executor_calls >= static_cast<std::size_t>(budget)) {
                r.stop_reason = StopReason::budget;
                break;
            }
            continue;
        }
        if (!e.steps.empty()) {
            if (expansions >= static_cast<std::size_t>(budget)) {
                heap.push_back(std::move(e));
                std::push_heap(heap.begin(), heap.end(), worse);
                r.stop_reason = StopReason::budget;
                break;
            }
            ++expansions;
            ++r.rollouts_used;
        }
        ++r.counters.expansions;
        auto cands = detail::scored_actions(e.hypothetical, registry, evaluator, r.counters);
        for (auto& c : cands) {
            ToolOutput placeholder;
            for (const auto& f : c.card->outputs) {
                placeholder.payload[f.name] = TypedValue{f.type, "planned:" + c.card->name + ":" + f.name};
            }
            Entry child = e;
            child.steps.push_back({Action{c.card->name, c.draft}, c.prior});
            child.prior_sum += c.prior;
            child.hypothetical = e.hypothetical.with({c.card->name, c.draft, std::move(placeholder)});
            child.jitter = jitter();
            heap.push_back(std::move(child));
            std::push_heap(heap.begin(), heap.end(), worse);
            ++r.nodes_expanded;
        }
        r.trace.push_back({r.trace.size() + 1, e.steps.empty() ? 0.0 : e.prior_sum / static_cast<double>(e.steps.size()),
                           opt.cost.seconds(r.counters)});
    }
    if (!solved && !heap.empty() && r.counters.executor_calls < static_cast<std::size_t>(budget)) {
        // budget spent on planning: run the most promising untried plan
        std::sort_heap(heap.begin(), heap.end(), worse);
        for (auto it = heap.rbegin(); it != heap.rend(); ++it) {
            if (!tried.count(path_key(*it))) {
                execute_path(*it);
                break;
            }
        }
    }
    // trace is per expansion; keep its length equal to the rollout count
    r.trace.resize(std::min(r.trace.size(), r.rollouts_used));
    if (executed) {
        r.trajectory = *executed;
    }
    r.final_context = executed_ctx;
    r.best_value = detail::mean_of(r.trajectory, &TrajectoryStep::q);
    r.goal_reached = goal(executed_ctx);
    r.seconds = opt.cost.seconds(r.counters);
    return r;
}

/// Depth-first with backtracking: children in prior order, each executed as it is
/// visited; a call that errors or scores below tau_post is abandoned. `budget`
/// counts executor invocations.
inline SearchResult run_dfs_backtrack(const SearchTask& task, const ToolRegistry& registry, Evaluator& evaluator,
                                      Executor& executor, int budget, const BaselineOptions& opt = {})
{
    if (budget < 1) {
        throw InvalidConfig("dfs budget must be >= 1");
    }
    SearchResult r;
    ExecutionCache cache;
    auto goal = [&](const Context& c) { return task.goal && task.goal(c); };
    std::vector<TrajectoryStep> path, best_path;
    Context best_ctx = task.initial;
    bool solved = false;
    bool out_of_budget = false;

    auto remember = [&](const Context& ctx) {
        if (path.size() > best_path.size()) {
            best_path = path;
            best_ctx = ctx;
        }
    };

    std::function<void(const Context&)> dfs = [&](const Context& ctx) {
        if (goal(ctx)) {
            solved = true;
            best_path = path;
            best_ctx = ctx;
            return;
        }
        remember(ctx);
        if (static_cast<int>(path.size()) >= opt.max_depth) {
            return;
        }
        ++r.counters.expansions;
        auto cands = detail::scored_actions(ctx, registry, evaluator, r.counters);
        r.nodes_expanded += cands.size();
        for (const auto& c : cands) {
            if (r.counters.executor_calls >= static_cast<std::size_t>(budget)) {
                out_of_budget = true;
                return;
            }
            auto next = detail::run_step(*c.card, c.draft, ctx, executor, cache, r.counters);
            const auto& out = next.history.back().output;
            ++r.counters.post_calls;
            double post = score_post(PostRequest{ctx, *c.card, c.draft, out}, evaluator);
            ++r.rollouts_used;
            path.push_back({Action{c.card->name, c.draft}, out, post, c.prior});
            r.trace.push_back({r.rollouts_used, detail::mean_of(path, &TrajectoryStep::r_post),
                               opt.cost.seconds(r.counters)});
            if (out.ok() && post >= opt.tau_post) {
                dfs(next);
            } else {
                remember(next);
            }
            if (solved || out_of_budget) {
                return;
            }
            path.pop_back();
        }
    };
    dfs(task.initial);
    r.stop_reason = solved ? StopReason::early_stop : out_of_budget ? StopReason::budget : StopReason::tree_exhausted;
    r.trajectory = best_path;
    r.final_context = best_ctx;
    r.best_value = detail::mean_of(r.trajectory, &TrajectoryStep::r_post);
    r.goal_reached = goal(best_ctx);
    r.seconds = opt.cost.seconds(r.counters);
    return r;
}

/// The engine with its guidance switched off: every prior is 1, nothing is
/// pruned before or after execution.
inline SearchConfig vanilla_config(SearchConfig config)
{
    config.use_pre_eval = false;
    config.tau_pre = 0.0;
    config.top_k = kUnboundedTopK;
    config.tau_post = 0.0;
    return config;
}

inline SearchResult run_vanilla_mcts(const SearchTask& task, const ToolRegistry& registry, Evaluator& evaluator,
                                     Executor& executor, const SearchConfig& config, SearchHooks hooks = {})
{
    return run_search(task, registry, evaluator, executor, vanilla_config(config), std::move(hooks));
}

} // namespace tooltree
