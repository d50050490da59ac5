#include "support.hpp"

#include <tooltree/baselines/planners.hpp>
#include <tooltree/sim/generator.hpp>
#include <tooltree/sim/metrics.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace tooltree;
using namespace testing_support;

namespace {

SchemaType kind(const std::string& k) { return SchemaType::structured({{k, SchemaType::text()}}); }

std::vector<std::string> tools_of(const SearchResult& r)
{
    std::vector<std::string> out;
    for (const auto& s : r.trajectory) {
        out.push_back(s.action.tool);
    }
    return out;
}

std::vector<std::string> executed_tools(const SearchResult& r)
{
    std::vector<std::string> out;
    for (const auto& e : r.events) {
        if (e.kind == EventKind::execute) {
            out.push_back(e.tool);
        }
    }
    return out;
}

SearchTask goal_on(const std::string& tool)
{
    SearchTask t;
    t.id = "goal-" + tool;
    t.initial.query = "how many wheels";
    t.initial.attachments.push_back({"photo", {SchemaType::image_ref(), "img:1"}});
    t.goal = [tool](const Context& c) {
        for (const auto& h : c.history) {
            if (h.tool == tool && h.output.ok()) return true;
        }
        return false;
    };
    return t;
}

ToolOutput fail(const ToolCard&, const ArgumentDraft&, const Context&) { return ToolOutput::error("boom"); }

// a -> b -> c, each the prior argmax, plus a low-prior distractor.
struct Aligned {
    ToolRegistry registry = make_registry({
        make_card("a", {{"q", SchemaType::text()}}, {{"o", kind("A")}}),
        make_card("b", {{"i", kind("A")}}, {{"o", kind("B")}}),
        make_card("c", {{"i", kind("B")}}, {{"o", kind("C")}}),
        make_card("d", {{"q", SchemaType::text()}}, {{"o", kind("D")}}),
    });
    ScriptedJudge judge;
    ScriptedExecutor exec;
    SearchTask task = goal_on("c");
    Aligned() { judge.pre = {{"a", 0.9}, {"b", 0.9}, {"c", 0.9}, {"d", 0.2}}; }
};

// The captioner looks best and feeds a calculator that answers from text; only
// detector -> counter -> tally reaches the goal.
struct Shortcut {
    ToolRegistry registry = make_registry({
        make_card("captioner", {{"image", SchemaType::image_ref()}}, {{"caption", SchemaType::text()}}),
        make_card("calculator", {{"expr", SchemaType::text()}}, {{"value", SchemaType::number()}}),
        make_card("detector", {{"image", SchemaType::image_ref()}}, {{"boxes", kind("boxes")}}),
        make_card("counter", {{"boxes", kind("boxes")}}, {{"n", kind("count")}}),
        make_card("tally", {{"n", kind("count")}}, {{"value", SchemaType::number()}}),
    });
    ScriptedJudge judge;
    ScriptedExecutor exec;
    SearchTask task = goal_on("tally");
    Shortcut()
    {
        judge.pre = {{"captioner", 0.95}, {"calculator", 0.9}, {"detector", 0.6}, {"counter", 0.8}, {"tally", 0.8}};
        judge.post = {{"captioner", 0.3}, {"calculator", 0.2}, {"detector", 0.7}, {"counter", 0.8}, {"tally", 0.9}};
    }
};

} // namespace

TEST_CASE("baseline kinds have distinct names")
{
    std::set<std::string> names;
    for (auto k : {BaselineKind::greedy_reactive, BaselineKind::best_first, BaselineKind::dfs_backtrack,
                   BaselineKind::vanilla_mcts}) {
        names.insert(to_string(k));
    }
    CHECK(names.size() == 4);
}

TEST_CASE("greedy follows the tempting shortcut and fails")
{
    Shortcut w;
    auto r = run_greedy(w.task, w.registry, w.judge, w.exec, 3);
    CHECK_FALSE(r.goal_reached);
    CHECK(tools_of(r) == std::vector<std::string>{"captioner", "calculator", "detector"});

    SearchConfig cfg;
    cfg.top_k = 3;
    Shortcut w2;
    auto tree = run_search(w2.task, w2.registry, w2.judge, w2.exec, cfg);
    CHECK(tree.goal_reached);
}

TEST_CASE("greedy succeeds when the gold chain is the prior argmax")
{
    Aligned w;
    auto r = run_greedy(w.task, w.registry, w.judge, w.exec, 5);
    CHECK(r.goal_reached);
    CHECK(tools_of(r) == std::vector<std::string>{"a", "b", "c"});
    CHECK(r.counters.executor_calls == 3);
    CHECK(r.stop_reason == StopReason::early_stop);

    Aligned cut;
    auto partial = run_greedy(cut.task, cut.registry, cut.judge, cut.exec, 2);
    CHECK_FALSE(partial.goal_reached);
    CHECK(tools_of(partial) == std::vector<std::string>{"a", "b"});
    CHECK(partial.stop_reason == StopReason::budget);

    CHECK_THROWS_AS(run_greedy(cut.task, cut.registry, cut.judge, cut.exec, 0), InvalidConfig);
}

TEST_CASE("best-first switches branches after a dead end")
{
    // root -> x (0.9, errors when run) ; root -> y (0.6) -> z (0.9, goal)
    auto registry = make_registry({
        make_card("x", {{"image", SchemaType::image_ref()}}, {{"o", kind("X")}}),
        make_card("y", {{"image", SchemaType::image_ref()}}, {{"o", kind("Y")}}),
        make_card("z", {{"i", kind("Y")}}, {{"o", kind("Z")}}),
    });
    ScriptedJudge judge;
    judge.pre = {{"x", 0.9}, {"y", 0.6}, {"z", 0.9}};
    ScriptedExecutor exec;
    exec.tools["x"] = fail;
    auto task = goal_on("z");

    // Hand-run queue, means in brackets:
    //   pop x[.9] -> push xy[.75]; pop xy -> push xyz[.8]; pop xyz: run x, fails
    //   pop y[.6] -> push yx[.75], yz[.75]; whichever pops, the run that succeeds is y, z
    //   real calls: x, y, z (a second x is a cache hit)
    auto r = run_best_first(task, registry, judge, exec, 10);
    CHECK(r.goal_reached);
    CHECK(tools_of(r) == std::vector<std::string>{"y", "z"});
    CHECK(r.counters.executor_calls == 3);
    CHECK(r.rollouts_used <= 10);

    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        ScriptedExecutor e2;
        e2.tools["x"] = fail;
        BaselineOptions opt;
        opt.seed = seed;
        auto again = run_best_first(task, registry, judge, e2, 10, opt);
        CHECK(again.goal_reached);
        CHECK(tools_of(again) == std::vector<std::string>{"y", "z"});
    }
}

TEST_CASE("best-first with budget one expands only the best root child")
{
    auto registry = make_registry({
        make_card("x", {{"image", SchemaType::image_ref()}}, {{"o", kind("X")}}),
        make_card("y", {{"image", SchemaType::image_ref()}}, {{"o", kind("Y")}}),
        make_card("z", {{"i", kind("Y")}}, {{"o", kind("Z")}}),
    });
    ScriptedJudge judge;
    judge.pre = {{"x", 0.9}, {"y", 0.6}, {"z", 0.9}};
    ScriptedExecutor exec;
    auto r = run_best_first(goal_on("z"), registry, judge, exec, 1);
    CHECK(r.rollouts_used == 1);
    CHECK(r.counters.expansions == 2);
    CHECK(r.stop_reason == StopReason::budget);
    REQUIRE_FALSE(r.trajectory.empty());
    CHECK(r.trajectory.front().action.tool == "x");
}

TEST_CASE("best-first on a single branch matches greedy")
{
    auto registry = make_registry({
        make_card("a", {{"q", SchemaType::text()}}, {{"o", kind("A")}}),
        make_card("b", {{"i", kind("A")}}, {{"o", kind("B")}}),
        make_card("c", {{"i", kind("B")}}, {{"o", kind("C")}}),
    });
    ScriptedJudge judge;
    ScriptedExecutor e1, e2;
    auto task = goal_on("c");
    auto g = run_greedy(task, registry, judge, e1, 10);
    auto b = run_best_first(task, registry, judge, e2, 10);
    CHECK(g.goal_reached);
    CHECK(b.goal_reached);
    REQUIRE(g.trajectory.size() == b.trajectory.size());
    for (std::size_t i = 0; i < g.trajectory.size(); ++i) {
        CHECK(g.trajectory[i].action == b.trajectory[i].action);
        CHECK(g.trajectory[i].output == b.trajectory[i].output);
    }
    CHECK(e1.invocations == e2.invocations);
}

TEST_CASE("dfs backtracks out of a failing branch")
{
    // f1 (0.9) -> f2 (0.9, errors); g1 (0.6) -> g2 -> g3 is the gold chain.
    auto registry = make_registry({
        make_card("f1", {{"q", SchemaType::text()}}, {{"o", kind("F1")}}),
        make_card("f2", {{"i", kind("F1")}}, {{"o", kind("F2")}}),
        make_card("g1", {{"q", SchemaType::text()}}, {{"o", kind("G1")}}),
        make_card("g2", {{"i", kind("G1")}}, {{"o", kind("G2")}}),
        make_card("g3", {{"i", kind("G2")}}, {{"o", kind("G3")}}),
    });
    ScriptedJudge judge;
    judge.pre = {{"f1", 0.9}, {"f2", 0.9}, {"g1", 0.6}, {"g2", 0.6}, {"g3", 0.6}};
    ScriptedExecutor exec;
    exec.tools["f2"] = fail;
    auto r = run_dfs_backtrack(goal_on("g3"), registry, judge, exec, 20);
    CHECK(r.goal_reached);
    const std::size_t failing_prefix = 2, gold_chain = 3;
    CHECK(r.counters.executor_calls == failing_prefix + gold_chain);
    CHECK(r.stop_reason == StopReason::early_stop);
    CHECK(r.trajectory.back().action.tool == "g3");
}

TEST_CASE("dfs gives up when every branch fails")
{
    auto registry = make_registry({
        make_card("p", {{"q", SchemaType::text()}}, {{"o", kind("P")}}),
        make_card("r", {{"q", SchemaType::text()}}, {{"o", kind("R")}}),
    });
    ScriptedJudge judge;
    ScriptedExecutor exec;
    exec.tools["p"] = fail;
    exec.tools["r"] = fail;
    auto task = goal_on("never");
    auto r = run_dfs_backtrack(task, registry, judge, exec, 20);
    CHECK_FALSE(r.goal_reached);
    CHECK(r.stop_reason == StopReason::tree_exhausted);
    CHECK(r.counters.executor_calls == 2);

    ScriptedExecutor e2;
    e2.tools["p"] = fail;
    e2.tools["r"] = fail;
    auto tight = run_dfs_backtrack(task, registry, judge, e2, 1);
    CHECK_FALSE(tight.goal_reached);
    CHECK(tight.stop_reason == StopReason::budget);
}

TEST_CASE("dfs on an aligned chain costs what greedy costs")
{
    Aligned a, b;
    auto g = run_greedy(a.task, a.registry, a.judge, a.exec, 10);
    auto d = run_dfs_backtrack(b.task, b.registry, b.judge, b.exec, 10);
    CHECK(d.goal_reached);
    CHECK(d.counters.executor_calls == g.counters.executor_calls);
    CHECK(tools_of(d) == tools_of(g));
}

TEST_CASE("greedy is the engine with one child, no bonus and no post pruning")
{
    sim::GeneratorParams p;
    auto suite = sim::generate_suite(p, 40);
    for (const auto& t : suite) {
        auto registry = t.registry();
        SearchTask st{t.task_id, t.initial_context(), [&t](const Context& c) { return t.goal_satisfied(c); }};
        int len = static_cast<int>(t.gold_plan.size());

        auto j1 = sim::make_oracle_evaluator(t);
        sim::SimExecutor e1(t);
        auto g = run_greedy(st, registry, j1, e1, len);

        SearchConfig cfg;
        cfg.r_max = len;
        cfg.top_k = 1;
        cfg.tau_post = 0.0;
        cfg.tau_pre = 0.0;
        cfg.lambda = 0.0;
        auto j2 = sim::make_oracle_evaluator(t);
        sim::SimExecutor e2(t);
        auto s = run_search(st, registry, j2, e2, cfg);

        std::vector<std::string> greedy_calls;
        for (const auto& step : g.trajectory) {
            greedy_calls.push_back(step.action.tool);
        }
        CHECK(executed_tools(s) == greedy_calls);
        CHECK(s.goal_reached == g.goal_reached);
        CHECK(s.counters.executor_calls == g.counters.executor_calls);
    }
}

TEST_CASE("vanilla reduces the selection score to classical UCT")
{
    auto cfg = vanilla_config(SearchConfig{});
    CHECK_FALSE(cfg.use_pre_eval);
    CHECK(cfg.tau_pre == 0.0);
    CHECK(cfg.top_k == kUnboundedTopK);
    CHECK(cfg.tau_post == 0.0);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0, 1), lam(0, 3);
    std::uniform_int_distribution<std::size_t> cnt(1, 500);
    for (int i = 0; i < 2000; ++i) {
        SearchNode n;
        n.value = unit(rng);
        n.prior = 1.0;
        n.visits = cnt(rng);
        std::size_t parent = n.visits + cnt(rng);
        double l = lam(rng);
        double classical = n.value + l * std::sqrt(std::log(static_cast<double>(parent)) / static_cast<double>(n.visits));
        CHECK(std::abs(uct_score(n, parent, l) - classical) <= 1e-12);
    }

    Shortcut w;
    bool all_one = true;
    SearchHooks hooks;
    hooks.on_rollout = [&](const SearchTree& tree, std::size_t) {
        for (NodeId id = 1; id < tree.nodes.size(); ++id) {
            all_one = all_one && tree[id].prior == 1.0;
        }
    };
    auto r = run_vanilla_mcts(w.task, w.registry, w.judge, w.exec, SearchConfig{}, hooks);
    CHECK(all_one);
    CHECK(r.counters.pre_calls == 0);
}

TEST_CASE("vanilla expands at least as many nodes as the guided search")
{
    sim::GeneratorParams p;
    auto suite = sim::generate_suite(p, 30);
    std::vector<std::size_t> guided_stopping, vanilla_stopping;
    for (const auto& t : suite) {
        auto registry = t.registry();
        SearchTask st{t.task_id, t.initial_context(), [&t](const Context& c) { return t.goal_satisfied(c); }};
        auto run = [&](bool vanilla, int window) {
            SearchConfig cfg;
            cfg.r_max = 32;
            cfg.seed = 5;
            cfg.early_stop_window = window;
            auto judge = sim::make_oracle_evaluator(t);
            sim::SimExecutor exec(t);
            return vanilla ? run_vanilla_mcts(st, registry, judge, exec, cfg) : run_search(st, registry, judge, exec, cfg);
        };
        // equal rollout counts: every task
        auto g = run(false, 60), v = run(true, 60);
        CHECK(v.rollouts_used == 32);
        CHECK(v.nodes_expanded >= g.nodes_expanded);
        // with early stopping the flat vanilla values can end a run sooner, so compare medians
        guided_stopping.push_back(run(false, 10).nodes_expanded);
        vanilla_stopping.push_back(run(true, 10).nodes_expanded);
    }
    auto median = [](std::vector<std::size_t> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    CHECK(median(vanilla_stopping) >= median(guided_stopping));
}

TEST_CASE("vanilla finds the gold path on a tiny tree")
{
    // Three tools: a then b reach the goal, d is a distractor.
    sim::SyntheticTask t;
    t.task_id = "tiny";
    t.query = "q";
    auto mk = [](std::string name, SchemaType in, SchemaType out, std::map<std::string, std::string> expects) {
        sim::SimTool s;
        s.card = make_card(name, {{"input", in}}, {{"result", out}});
        s.expects = std::move(expects);
        s.produces["result"] = "out:" + name;
        s.role = sim::ToolRole::gold;
        return s;
    };
    t.tools = {mk("a", SchemaType::text(), kind("A"), {{"input", "q"}}),
               mk("b", kind("A"), kind("B"), {{"input", "out:a"}}),
               mk("d", SchemaType::text(), SchemaType::text(), {})};
    t.tools[2].role = sim::ToolRole::distractor;
    t.gold_plan = {{"a", {}}, {"b", {0}}};
    auto registry = t.registry();
    SearchTask st{t.task_id, t.initial_context(), [&t](const Context& c) { return t.goal_satisfied(c); }};

    // exhaustive: shortest successful call sequences over all three tools
    std::vector<std::vector<std::string>> shortest;
    std::function<void(const Context&, std::vector<std::string>&)> walk = [&](const Context& ctx,
                                                                            std::vector<std::string>& seq) {
        if (t.goal_satisfied(ctx)) {
            if (shortest.empty() || seq.size() < shortest.front().size()) shortest.clear();
            if (shortest.empty() || seq.size() == shortest.front().size()) shortest.push_back(seq);
            return;
        }
        if (seq.size() == 3) return;
        for (const auto& a : admissible_actions(ctx, registry)) {
            auto out = sim::execute_sim_tool(*t.tool(a.card->name), a.draft, ctx);
            seq.push_back(a.card->name);
            walk(ctx.with({a.card->name, a.draft, out}), seq);
            seq.pop_back();
        }
    };
    std::vector<std::string> seq;
    walk(t.initial_context(), seq);
    REQUIRE(shortest.size() == 1);

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto judge = sim::make_oracle_evaluator(t);
        sim::SimExecutor exec(t);
        SearchConfig cfg;
        cfg.seed = seed;
        auto r = run_vanilla_mcts(st, registry, judge, exec, cfg);
        CHECK(r.goal_reached);
        CHECK(tools_of(r) == shortest.front());
    }
}
