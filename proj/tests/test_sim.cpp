#include <tooltree/retrieval.hpp>
#include <tooltree/sim/generator.hpp>
#include <tooltree/sim/metrics.hpp>

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <sstream>

using namespace tooltree;
using namespace tooltree::sim;

namespace {

// Runs the gold plan in its stored order and returns the executed steps.
std::vector<TrajectoryStep> run_gold(const SyntheticTask& task, Context* final_ctx = nullptr)
{
    std::vector<TrajectoryStep> out;
    Context ctx = task.initial_context();
    for (const auto& g : task.gold_plan) {
        const auto* tool = task.tool(g.tool);
        auto draft = draft_arguments(ctx, tool->card);
        auto res = execute_sim_tool(*tool, draft, ctx);
        out.push_back({Action{g.tool, draft}, res, 0.0, 0.0});
        ctx = ctx.with({g.tool, draft, res});
    }
    if (final_ctx) {
        *final_ctx = ctx;
    }
    return out;
}

SimTool text_tool(std::string name, std::map<std::string, std::string> expects = {})
{
    SimTool t;
    t.card.name = std::move(name);
    t.card.description = "tool";
    t.card.inputs = {{"input", SchemaType::text(), true}};
    t.card.outputs = {{"result", SchemaType::text()}};
    t.expects = std::move(expects);
    t.produces["result"] = "out:" + t.card.name;
    t.role = ToolRole::gold;
    return t;
}

TrajectoryStep ok_step(const std::string& tool, const std::string& value)
{
    ToolOutput o;
    o.payload["result"] = TypedValue{SchemaType::text(), value};
    ArgumentDraft d;
    d.bindings.emplace("input", QueryTextRef{});
    return {Action{tool, d}, o, 0.0, 0.0};
}

} // namespace

TEST_CASE("generation is deterministic in seed and index")
{
    GeneratorParams p;
    p.seed = 7;
    CHECK(generate_task(p, 0) == generate_task(p, 0));
    CHECK(generate_task(p, 3) == generate_task(p, 3));
    CHECK_FALSE(generate_task(p, 0) == generate_task(p, 1));
    p.seed = 8;
    GeneratorParams q;
    q.seed = 7;
    CHECK_FALSE(generate_task(p, 0) == generate_task(q, 0));
}

TEST_CASE("fixed ranges give a fixed registry size")
{
    GeneratorParams p;
    p.chain_depth = {3, 3};
    p.branching = {2, 2};
    p.distractor_count = {4, 4};
    for (std::size_t i = 0; i < 20; ++i) {
        auto t = generate_task(p, i);
        CHECK(t.registry().size() == 3 + 4);
        CHECK(t.gold_plan.size() == 3);
    }
}

TEST_CASE("generator parameters are validated")
{
    GeneratorParams p;
    p.chain_depth = {4, 3};
    CHECK_THROWS_AS(generate_task(p, 0), InvalidParams);
    p = {};
    p.distractor_prior_inflation = 1.5;
    CHECK_THROWS_AS(generate_task(p, 0), InvalidParams);
    p = {};
    p.distractor_count = {-1, 2};
    CHECK_THROWS_AS(generate_task(p, 0), InvalidParams);
}

TEST_CASE("full inflation puts a query keyword in every distractor")
{
    GeneratorParams p;
    p.distractor_prior_inflation = 1.0;
    for (std::size_t i = 0; i < 50; ++i) {
        auto t = generate_task(p, i);
        auto q = tokenize(t.query);
        std::set<std::string> keywords(q.begin(), q.end());
        for (const auto& tool : t.tools) {
            if (tool.role == ToolRole::gold) continue;
            CHECK(tool.role == ToolRole::trap);
            auto words = tokenize(tool.card.description);
            CHECK(std::any_of(words.begin(), words.end(), [&](const auto& w) { return keywords.count(w) > 0; }));
        }
    }
}

TEST_CASE("default suite shape")
{
    GeneratorParams p;
    auto suite = generate_suite(p, 200);
    for (const auto& t : suite) {
        CHECK(t.difficulty.chain_depth >= 3);
        CHECK(t.difficulty.chain_depth <= 5);
        CHECK(t.gold_plan.size() == static_cast<std::size_t>(t.difficulty.chain_depth));
        CHECK(t.difficulty.distractors >= 6);
        CHECK(t.difficulty.distractors <= 10);
        CHECK(t.tools.size() == t.gold_plan.size() + static_cast<std::size_t>(t.difficulty.distractors));
        for (std::size_t i = 0; i < t.gold_plan.size(); ++i) {
            for (auto dep : t.gold_plan[i].deps) {
                CHECK(dep < i);
            }
        }
        int traps = 0;
        for (const auto& tool : t.tools) {
            CHECK(validate_card(tool.card).empty());
            traps += tool.role == ToolRole::trap;
        }
        CHECK(traps == static_cast<int>(std::lround(0.5 * t.difficulty.distractors)));
    }
}

TEST_CASE("every generated task is solvable by its gold plan")
{
    GeneratorParams p;
    for (const auto& t : generate_suite(p, 200)) {
        Context ctx;
        auto steps = run_gold(t, &ctx);
        CHECK(t.goal_satisfied(ctx));
        for (const auto& s : steps) {
            CHECK(s.output.ok());
        }
        auto m = evaluate_success(t, steps);
        CHECK(m.pass == 1.0);
        CHECK(m.tool_f1 == 1.0);
        CHECK(m.arg_f1 == 1.0);
        CHECK(m.plan_f1 == 1.0);
        CHECK(m.exec_f1 == 1.0);
    }
}

TEST_CASE("lexical prior ranks a distractor above a gold tool when inflated")
{
    GeneratorParams p;
    p.distractor_prior_inflation = 1.0;
    auto suite = generate_suite(p, 200);
    int fooled = 0;
    for (const auto& t : suite) {
        auto reg = t.registry();
        double best_other = -1, worst_gold = 1e300;
        for (const auto& [card, score] : lexical_scores(t.query, reg)) {
            if (t.tool(card->name)->role == ToolRole::gold) {
                worst_gold = std::min(worst_gold, score);
            } else {
                best_other = std::max(best_other, score);
            }
        }
        fooled += best_other > worst_gold;
    }
    CHECK(fooled * 2 >= static_cast<int>(suite.size()));
}

TEST_CASE("image readers report the planted count")
{
    GeneratorParams p;
    for (std::size_t i = 0; i < 30; ++i) {
        auto t = generate_task(p, i);
        Context ctx = t.initial_context();
        for (const auto& tool : t.tools) {
            if (tool.role != ToolRole::gold) continue;
            const auto& in = tool.card.inputs;
            if (in.size() != 1 || !(in[0].type == SchemaType::image_ref())) continue;
            auto out = execute_sim_tool(tool, draft_arguments(ctx, tool.card), ctx);
            REQUIRE(out.ok());
            auto v = out.payload.at("result").value.get<std::string>();
            CHECK(v.ends_with(":n=" + std::to_string(t.planted_count)));
        }
    }
}

TEST_CASE("sim tools fail with error tokens and are pure")
{
    auto tool = text_tool("convert", {{"input", "out:ocr"}});
    Context ctx;
    ctx.query = "read the sign";
    auto draft = draft_arguments(ctx, tool.card);
    auto early = execute_sim_tool(tool, draft, ctx);
    REQUIRE_FALSE(early.ok());
    CHECK(*early.error_token == "missing_dependency");

    auto ocr = text_tool("ocr");
    auto o = execute_sim_tool(ocr, draft_arguments(ctx, ocr.card), ctx);
    auto after = ctx.with({"ocr", draft_arguments(ctx, ocr.card), o});
    auto d2 = draft_arguments(after, tool.card);
    auto good = execute_sim_tool(tool, d2, after);
    CHECK(good.ok());
    CHECK(execute_sim_tool(tool, d2, after) == good);
    CHECK(execute_sim_tool(tool, draft, ctx) == early);

    auto other = text_tool("other");
    other.card.outputs = {{"result", SchemaType::text()}};
    auto junk = execute_sim_tool(other, draft_arguments(ctx, other.card), ctx);
    auto wrong_ctx = ctx.with({"other", draft_arguments(ctx, other.card), junk});
    auto wrong = execute_sim_tool(tool, draft_arguments(wrong_ctx, tool.card), wrong_ctx);
    REQUIRE_FALSE(wrong.ok());
    CHECK(*wrong.error_token == "wrong_input");
}

TEST_CASE("oracle evaluator follows the plan, not the text")
{
    GeneratorParams p;
    auto t = generate_task(p, 0);
    auto judge = make_oracle_evaluator(t);
    Context ctx = t.initial_context();
    ArgumentDraft d;
    const auto& first = t.tool(t.gold_plan.front().tool)->card;
    CHECK(judge.score_pre({ctx, first, d}) == 0.9);
    CHECK(judge.score_post({ctx, first, d, ToolOutput::error("missing_dependency")}) == 0.0);
    for (const auto& tool : t.tools) {
        if (tool.role == ToolRole::trap) {
            CHECK(judge.score_pre({ctx, tool.card, d}) == 0.1);
        }
    }
}

TEST_CASE("metrics on hand-built trajectories")
{
    SyntheticTask t;
    t.task_id = "sign";
    t.query = "read the sign and convert it";
    t.tools = {text_tool("ocr", {{"input", t.query}}), text_tool("convert", {{"input", "out:ocr"}}), text_tool("calc")};
    t.tools[2].role = ToolRole::distractor;
    t.gold_plan = {{"ocr", {}}, {"convert", {0}}};

    // predicted {ocr, calc} vs gold {ocr, convert}: one hit out of two each way
    std::vector<TrajectoryStep> traj{ok_step("ocr", "out:ocr"), ok_step("calc", "out:calc")};
    auto m = evaluate_success(t, traj);
    double precision = 1.0 / 2.0, recall = 1.0 / 2.0;
    CHECK(m.tool_f1 == Catch::Approx(2 * precision * recall / (precision + recall)));
    CHECK(m.tool_f1 == Catch::Approx(0.5));
    CHECK(m.pass == 0.0);
    CHECK_FALSE(m.success);

    Context ctx;
    auto gold = run_gold(t, &ctx);
    auto perfect = evaluate_success(t, gold);
    CHECK(perfect.success);
    CHECK(perfect.pass == 1.0);
    CHECK(perfect.tool_f1 == 1.0);
    CHECK(perfect.arg_f1 == 1.0);
    CHECK(perfect.plan_f1 == 1.0);
    CHECK(perfect.exec_f1 == 1.0);

    auto none = evaluate_success(t, {});
    CHECK(none == Metrics{});
}

TEST_CASE("plan F1 accepts any topological order")
{
    SyntheticTask t;
    t.task_id = "fork";
    t.query = "q";
    t.tools = {text_tool("a"), text_tool("b"), text_tool("c")};
    t.gold_plan = {{"a", {}}, {"b", {}}, {"c", {0, 1}}};
    CHECK(topological_orders(t).size() == 2);
    std::vector<TrajectoryStep> ba{ok_step("b", "x"), ok_step("a", "x"), ok_step("c", "x")};
    CHECK(evaluate_success(t, ba).plan_f1 == 1.0);
    std::vector<TrajectoryStep> cab{ok_step("c", "x"), ok_step("a", "x"), ok_step("b", "x")};
    // pairs {(c,a),(c,b),(a,b)} against {(a,b),(a,c),(b,c)}: one shared pair
    CHECK(evaluate_success(t, cab).plan_f1 == Catch::Approx(1.0 / 3.0));
}

TEST_CASE("suites round-trip through JSON lines")
{
    GeneratorParams p;
    p.seed = 3;
    auto suite = generate_suite(p, 25);
    std::stringstream buf;
    write_suite(suite, buf);
    std::string text = buf.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 25);
    auto back = read_suite(buf);
    CHECK(back == suite);

    std::stringstream again;
    write_suite(back, again);
    CHECK(again.str() == text);

    std::istringstream bad("{\"task_id\": 1}\n");
    CHECK_THROWS_AS(read_suite(bad), SuiteParseError);
}
