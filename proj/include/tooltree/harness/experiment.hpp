#pragma once

#include <tooltree/baselines/planners.hpp>
#include <tooltree/errors.hpp>
#include <tooltree/evaluation/noise.hpp>
#include <tooltree/search/engine.hpp>
#include <tooltree/sim/metrics.hpp>
#include <tooltree/sim/task.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tooltree::harness {

enum class PlannerKind { tooltree, vanilla_mcts, greedy, best_first, dfs };

inline const char* to_string(PlannerKind k)
{
    switch (k) {
    case PlannerKind::tooltree: return "tooltree";
    case PlannerKind::vanilla_mcts: return "vanilla_mcts";
    case PlannerKind::greedy: return "greedy";
    case PlannerKind::best_first: return "best_first";
    case PlannerKind::dfs: return "dfs";
    }
    return "?";
}

inline PlannerKind planner_from_string(const std::string& s)
{
    for (auto k : {PlannerKind::tooltree, PlannerKind::vanilla_mcts, PlannerKind::greedy, PlannerKind::best_first,
                   PlannerKind::dfs}) {
        if (s == to_string(k)) {
            return k;
        }
    }
    if (s == "vanilla") return PlannerKind::vanilla_mcts;
    throw InvalidConfig("unknown planner: " + s);
}

struct AblationFlags {
    bool disable_pre_eval = false;
    bool disable_pre_prune = false;
    bool disable_post_eval = false;
    bool disable_post_prune = false;

    bool any() const { return disable_pre_eval || disable_pre_prune || disable_post_eval || disable_post_prune; }
    bool operator==(const AblationFlags&) const = default;
};

/// Engine configuration for a tooltree run under `flags`. Without pre-evaluation
/// there are no scores to prune on, so pre-pruning goes too.
inline SearchConfig apply_ablation(SearchConfig c, const AblationFlags& flags)
{
    if (flags.disable_pre_eval) {
        c.use_pre_eval = false;
    }
    if (flags.disable_pre_prune || flags.disable_pre_eval) {
        c.tau_pre = 0.0;
        c.top_k = kUnboundedTopK;
    }
    if (flags.disable_post_eval) {
        c.use_post_eval = false;
    }
    if (flags.disable_post_prune) {
        c.tau_post = 0.0;
    }
    return c;
}

struct Variant {
    std::string name;
    AblationFlags flags;
};

/// The seven ablation rows, in reporting order.
inline std::vector<Variant> ablation_variants()
{
    return {
        {"ToolTree", {}},
        {"-- Pre-pruning", {false, true, false, false}},
        {"-- Pre-evaluation", {true, false, false, false}},
        {"-- Post-pruning", {false, false, false, true}},
        {"-- Post-evaluation", {false, false, true, false}},
        {"-- Both Pruning", {false, true, false, true}},
        {"-- Both Evaluation", {true, false, true, false}},
    };
}

struct ExperimentSpec {
    std::string suite_path;
    std::vector<PlannerKind> planners{PlannerKind::tooltree};
    SearchConfig config;
    std::vector<int> budgets{32};
    std::optional<NoiseConfig> noise;
    AblationFlags ablation;
    std::string variant; ///< label for the ablation row; defaults to the planner name
    std::vector<std::uint64_t> seeds{0};
    std::string output_path;
    CostModel cost;
    OracleTiers tiers;
    bool keep_events = false;
    bool measure_wall_time = false;

    void validate() const
    {
        if (planners.empty()) throw InvalidConfig("no planners given");
        if (budgets.empty()) throw InvalidConfig("no budgets given");
        for (std::size_t i = 0; i < budgets.size(); ++i) {
            if (budgets[i] < 1) throw InvalidConfig("budgets must be >= 1");
            if (i && budgets[i] <= budgets[i - 1]) throw InvalidConfig("budgets must be strictly increasing");
        }
        if (seeds.empty()) throw InvalidConfig("no seeds given");
        if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
            throw InvalidConfig("seeds must be distinct");
        }
        config.validate();
    }
};

struct RunRow {
    std::string task_id;
    std::string planner;
    std::string variant;
    int budget = 0;
    std::uint64_t seed = 0;
    sim::Metrics metrics;
    double seconds = 0.0;
    std::optional<double> wall_seconds;
    std::size_t rollouts = 0;
    std::size_t nodes_expanded = 0;
    std::size_t executor_calls = 0;
    std::size_t pre_calls = 0;
    std::size_t post_calls = 0;
    std::size_t cache_hits = 0;
    std::string stop_reason;
    std::size_t noise_decisions = 0;
    std::size_t noise_errors = 0;
    std::string fault;
    nlohmann::json events; ///< null unless requested

    std::size_t judge_calls() const { return pre_calls + post_calls; }
    bool operator==(const RunRow&) const = default;
};

/// Rolled-up rows for one (planner, variant, budget) group.
struct Aggregate {
    std::string planner;
    std::string variant;
    int budget = 0;
    std::size_t rows = 0;
    std::size_t faults = 0;
    double pass_rate = 0.0;
    double tool_f1 = 0.0;
    double arg_f1 = 0.0;
    double plan_f1 = 0.0;
    double exec_f1 = 0.0;
    double median_nodes = 0.0;
    double median_rollouts = 0.0;
    double mean_seconds = 0.0;
    double mean_judge_calls = 0.0;
    double mean_executor_calls = 0.0;
    double judge_efficiency = 0.0; ///< pass rate per judge call
    double noise_error_rate = 0.0;
    bool operator==(const Aggregate&) const = default;
};

struct EfficiencyPoint {
    int budget = 0;
    double performance = 0.0;
    double seconds = 0.0;
};

struct EfficiencySegment {
    int from_budget = 0;
    int to_budget = 0;
    std::optional<double> efficiency; ///< empty when the time delta is zero
    bool operator==(const EfficiencySegment&) const = default;
};

struct EfficiencySeries {
    std::string planner;
    std::string variant;
    std::vector<EfficiencySegment> segments;
    bool operator==(const EfficiencySeries&) const = default;
};

struct RunReport {
    std::vector<RunRow> rows;
    std::vector<Aggregate> aggregates;
    std::vector<EfficiencySeries> efficiency;
    bool partial = false;

    const Aggregate* find(const std::string& planner, const std::string& variant, int budget) const
    {
        for (const auto& a : aggregates) {
            if (a.planner == planner && a.variant == variant && a.budget == budget) {
                return &a;
            }
        }
        return nullptr;
    }

    std::size_t faults() const
    {
        return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const RunRow& r) { return !r.fault.empty(); }));
    }
};

/// Finite-difference gain per second between consecutive budgets.
inline std::vector<EfficiencySegment> compute_efficiency(const std::vector<EfficiencyPoint>& points)
{
    if (points.size() < 2) {
        throw InsufficientPoints();
    }
    std::vector<EfficiencySegment> out;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const auto& a = points[i];
        const auto& b = points[i + 1];
        if (b.budget <= a.budget) {
            throw InvalidParams("efficiency points must have increasing budgets");
        }
        EfficiencySegment s{a.budget, b.budget, std::nullopt};
        double dt = b.seconds - a.seconds;
        if (dt != 0.0) {
            s.efficiency = (b.performance - a.performance) / dt;
        }
        out.push_back(s);
    }
    return out;
}

namespace detail {

inline double median(std::vector<double> v)
{
    if (v.empty()) {
        return 0.0;
    }
    std::sort(v.begin(), v.end());
    auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
    x ^= x >> 31;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 29;
    return x;
}

} // namespace detail

inline std::vector<Aggregate> aggregate_rows(const std::vector<RunRow>& rows)
{
    std::map<std::tuple<std::string, std::string, int>, std::vector<const RunRow*>> groups;
    std::vector<std::tuple<std::string, std::string, int>> order;
    for (const auto& r : rows) {
        auto key = std::make_tuple(r.planner, r.variant, r.budget);
        auto& g = groups[key];
        if (g.empty()) {
            order.push_back(key);
        }
        g.push_back(&r);
    }
    std::vector<Aggregate> out;
    for (const auto& key : order) {
        const auto& g = groups[key];
        Aggregate a;
        std::tie(a.planner, a.variant, a.budget) = key;
        a.rows = g.size();
        std::vector<double> nodes, rollouts;
        std::size_t decisions = 0, errors = 0;
        for (const auto* r : g) {
            a.faults += r->fault.empty() ? 0 : 1;
            a.pass_rate += r->metrics.pass;
            a.tool_f1 += r->metrics.tool_f1;
            a.arg_f1 += r->metrics.arg_f1;
            a.plan_f1 += r->metrics.plan_f1;
            a.exec_f1 += r->metrics.exec_f1;
            a.mean_seconds += r->seconds;
            a.mean_judge_calls += static_cast<double>(r->judge_calls());
            a.mean_executor_calls += static_cast<double>(r->executor_calls);
            nodes.push_back(static_cast<double>(r->nodes_expanded));
            rollouts.push_back(static_cast<double>(r->rollouts));
            decisions += r->noise_decisions;
            errors += r->noise_errors;
        }
        double n = static_cast<double>(g.size());
        for (double* f : {&a.pass_rate, &a.tool_f1, &a.arg_f1, &a.plan_f1, &a.exec_f1, &a.mean_seconds,
                          &a.mean_judge_calls, &a.mean_executor_calls}) {
            *f /= n;
        }
        a.median_nodes = detail::median(nodes);
        a.median_rollouts = detail::median(rollouts);
        a.judge_efficiency = a.mean_judge_calls > 0 ? a.pass_rate / a.mean_judge_calls : 0.0;
        a.noise_error_rate = decisions ? static_cast<double>(errors) / static_cast<double>(decisions) : 0.0;
        out.push_back(a);
    }
    return out;
}

inline std::vector<EfficiencySeries> efficiency_series(const std::vector<Aggregate>& aggregates)
{
    std::map<std::pair<std::string, std::string>, std::vector<EfficiencyPoint>> by;
    std::vector<std::pair<std::string, std::string>> order;
    for (const auto& a : aggregates) {
        auto key = std::make_pair(a.planner, a.variant);
        auto& pts = by[key];
        if (pts.empty()) {
            order.push_back(key);
        }
        pts.push_back({a.budget, a.pass_rate, a.mean_seconds});
    }
    std::vector<EfficiencySeries> out;
    for (const auto& key : order) {
        auto pts = by[key];
        std::sort(pts.begin(), pts.end(), [](const auto& x, const auto& y) { return x.budget < y.budget; });
        if (pts.size() < 2) {
            continue;
        }
        out.push_back({key.first, key.second, compute_efficiency(pts)});
    }
    return out;
}

inline RunReport finish_report(std::vector<RunRow> rows, bool partial = false)
{
    RunReport r;
    r.rows = std::move(rows);
    r.aggregates = aggregate_rows(r.rows);
    r.efficiency = efficiency_series(r.aggregates);
    r.partial = partial;
    return r;
}

/// Runs one grid cell. Faults are caught and recorded on the row.
inline RunRow run_cell(const sim::SyntheticTask& task, PlannerKind planner, int budget, std::uint64_t seed,
                       const ExperimentSpec& spec, std::size_t task_index)
{
    RunRow row;
    row.task_id = task.task_id;
    row.planner = to_string(planner);
    row.variant = spec.variant.empty() ? row.planner : spec.variant;
    row.budget = budget;
    row.seed = seed;
    try {
        auto registry = task.registry();
        auto oracle = sim::make_oracle_evaluator(task, spec.tiers);
        sim::SimExecutor executor(task);
        SearchTask st{task.task_id, task.initial_context(), [&task](const Context& c) { return task.goal_satisfied(c); }};

        SearchConfig cfg = spec.config;
        cfg.seed = detail::mix(seed, task_index);
        cfg.r_max = std::min(budget, kMaxRollouts);
        if (planner == PlannerKind::tooltree) {
            cfg = apply_ablation(cfg, spec.ablation);
        } else if (planner == PlannerKind::vanilla_mcts) {
            cfg = vanilla_config(cfg);
        }

        std::optional<NoisyEvaluator> noisy;
        Evaluator* judge = &oracle;
        if (spec.noise && spec.noise->error_rate > 0) {
            NoiseConfig nc = *spec.noise;
            nc.seed = detail::mix(detail::mix(spec.noise->seed, seed), task_index);
            noisy.emplace(oracle, nc, cfg.tau_pre, cfg.tau_post);
            judge = &*noisy;
        }

        BaselineOptions bopt;
        bopt.max_depth = cfg.max_depth;
        bopt.tau_post = spec.config.tau_post;
        bopt.seed = cfg.seed;
        bopt.cost = spec.cost;
        SearchHooks hooks;
        hooks.cost = spec.cost;

        auto started = std::chrono::steady_clock::now();
        SearchResult res;
        switch (planner) {
        case PlannerKind::tooltree:
        case PlannerKind::vanilla_mcts:
            res = run_search(st, registry, *judge, executor, cfg, hooks);
            break;
        case PlannerKind::greedy:
            res = run_greedy(st, registry, *judge, executor, budget, bopt);
            break;
        case PlannerKind::best_first:
            res = run_best_first(st, registry, *judge, executor, budget, bopt);
            break;
        case PlannerKind::dfs:
            res = run_dfs_backtrack(st, registry, *judge, executor, budget, bopt);
            break;
        }
        if (spec.measure_wall_time) {
            row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        }
        row.metrics = sim::evaluate_success(task, res.trajectory);
        row.seconds = res.seconds;
        row.rollouts = res.rollouts_used;
        row.nodes_expanded = res.nodes_expanded;
        row.executor_calls = res.counters.executor_calls;
        row.pre_calls = res.counters.pre_calls;
        row.post_calls = res.counters.post_calls;
        row.cache_hits = res.counters.cache_hits;
        row.stop_reason = to_string(res.stop_reason);
        if (noisy) {
            auto s = noisy->stats();
            row.noise_decisions = s.decisions;
            row.noise_errors = s.false_positives + s.false_negatives;
        }
        if (spec.keep_events) {
            row.events = result_to_json(res, true);
        }
    } catch (const std::exception& e) {
        row.fault = e.what();
        row.metrics = {};
    }
    return row;
}

using RowSink = std::function<void(const RunRow&)>;

/// Every (planner, budget, seed, task) cell in that nesting order.
inline RunReport run_experiment(const ExperimentSpec& spec, const std::vector<sim::SyntheticTask>& suite,
                                const RowSink& sink = {})
{
    spec.validate();
    std::vector<RunRow> rows;
    rows.reserve(spec.planners.size() * spec.budgets.size() * spec.seeds.size() * suite.size());
    for (auto planner : spec.planners) {
        for (int budget : spec.budgets) {
            for (auto seed : spec.seeds) {
                for (std::size_t i = 0; i < suite.size(); ++i) {
                    rows.push_back(run_cell(suite[i], planner, budget, seed, spec, i));
                    if (sink) {
                        sink(rows.back());
                    }
                }
            }
        }
    }
    return finish_report(std::move(rows));
}

inline RunReport run_experiment(const ExperimentSpec& spec, const RowSink& sink = {})
{
    return run_experiment(spec, sim::load_suite(spec.suite_path), sink);
}

/// Table-style ablation: the seven variants of the tooltree planner at one budget.
inline RunReport run_ablation(ExperimentSpec spec, const std::vector<sim::SyntheticTask>& suite,
                              const RowSink& sink = {})
{
    std::vector<RunRow> rows;
    spec.planners = {PlannerKind::tooltree};
    for (const auto& v : ablation_variants()) {
        spec.ablation = v.flags;
        spec.variant = v.name;
        auto part = run_experiment(spec, suite, sink);
        rows.insert(rows.end(), part.rows.begin(), part.rows.end());
    }
    return finish_report(std::move(rows));
}

struct RestorationRow {
    std::string configuration;
    double decision_error_rate = 0.0;
    double pass_rate = 0.0;
};

struct RestorationReport {
    double error_rate = 0.0;
    std::vector<RestorationRow> rows; ///< noisy, fix-false-positives, fix-false-negatives, oracle
    RunReport runs;
};

/// Counterfactual judge repair: the same noisy judge with false positives undone,
/// with false negatives undone, and with both undone (the oracle).
inline RestorationReport run_restoration(ExperimentSpec spec, const std::vector<sim::SyntheticTask>& suite,
                                         double error_rate, const RowSink& sink = {})
{
    std::uint64_t noise_seed = spec.noise ? spec.noise->seed : 0;
    struct Config {
        const char* name;
        double rate;
        FlipMode mode;
    };
    const Config configs[] = {{"noisy", error_rate, FlipMode::both},
                              {"fix-false-positives", error_rate, FlipMode::false_negative_only},
                              {"fix-false-negatives", error_rate, FlipMode::false_positive_only},
                              {"oracle", 0.0, FlipMode::both}};
    RestorationReport out;
    out.error_rate = error_rate;
    std::vector<RunRow> rows;
    for (const auto& c : configs) {
        spec.noise = NoiseConfig{c.rate, c.mode, noise_seed};
        spec.variant = c.name;
        auto part = run_experiment(spec, suite, sink);
        std::size_t decisions = 0, errors = 0;
        double pass = 0;
        for (const auto& r : part.rows) {
            decisions += r.noise_decisions;
            errors += r.noise_errors;
            pass += r.metrics.pass;
        }
        out.rows.push_back({c.name, decisions ? static_cast<double>(errors) / static_cast<double>(decisions) : 0.0,
                            part.rows.empty() ? 0.0 : pass / static_cast<double>(part.rows.size())});
        rows.insert(rows.end(), part.rows.begin(), part.rows.end());
    }
    out.runs = finish_report(std::move(rows));
    return out;
}

} // namespace tooltree::harness
