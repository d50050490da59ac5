#include <tooltree/harness/experiment.hpp>
#include <tooltree/harness/report.hpp>
#include <tooltree/sim/generator.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

using namespace tooltree;
using namespace tooltree::harness;

namespace {

void print_aggregates(const RunReport& report)
{
    std::printf("%-14s %-22s %6s %6s %8s %8s %8s %9s %9s\n", "planner", "variant", "budget", "pass", "tool_f1",
                "nodes", "rollouts", "seconds", "judge");
    for (const auto& a : report.aggregates) {
        std::printf("%-14s %-22s %6d %6.3f %8.3f %8.1f %8.1f %9.2f %9.2f\n", a.planner.c_str(), a.variant.c_str(),
                    a.budget, a.pass_rate, a.tool_f1, a.median_nodes, a.median_rollouts, a.mean_seconds,
                    a.mean_judge_calls);
    }
    for (const auto& s : report.efficiency) {
        for (const auto& seg : s.segments) {
            if (seg.efficiency) {
                std::printf("efficiency %s/%s %d->%d: %.5f per s\n", s.planner.c_str(), s.variant.c_str(),
                            seg.from_budget, seg.to_budget, *seg.efficiency);
            } else {
                std::printf("efficiency %s/%s %d->%d: undefined\n", s.planner.c_str(), s.variant.c_str(),
                            seg.from_budget, seg.to_budget);
            }
        }
    }
}

ReportFormat parse_format(const std::string& s)
{
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    throw InvalidConfig("unknown format: " + s);
}

FlipMode parse_flip(const std::string& s)
{
    if (s == "both") return FlipMode::both;
    if (s == "false_positive_only") return FlipMode::false_positive_only;
    if (s == "false_negative_only") return FlipMode::false_negative_only;
    throw InvalidConfig("unknown flip mode: " + s);
}

struct RunArgs {
    std::string suite;
    std::vector<std::string> planners{"tooltree"};
    std::vector<int> budgets{32};
    std::vector<std::uint64_t> seeds{0};
    std::string config_file;
    std::vector<std::string> overrides;
    double noise_rate = 0.0;
    std::string flip_mode = "both";
    std::uint64_t noise_seed = 0;
    bool no_pre_eval = false, no_pre_prune = false, no_post_eval = false, no_post_prune = false;
    bool ablation_table = false;
    bool events = false;
    bool wall_time = false;
    std::string out;
    std::string format = "json";
    std::string rows_log;
    double judge_seconds = CostModel{}.judge_call_seconds;
    double executor_seconds = CostModel{}.executor_call_seconds;
};

void add_run_options(CLI::App* cmd, RunArgs& a, bool planners_and_flags)
{
    cmd->add_option("--suite", a.suite, "task suite (JSON lines)")->required();
    if (planners_and_flags) {
        cmd->add_option("--planner", a.planners, "tooltree, vanilla_mcts, greedy, best_first, dfs")->expected(1, -1);
        cmd->add_flag("--disable-pre-eval", a.no_pre_eval);
        cmd->add_flag("--disable-pre-prune", a.no_pre_prune);
        cmd->add_flag("--disable-post-eval", a.no_post_eval);
        cmd->add_flag("--disable-post-prune", a.no_post_prune);
        cmd->add_flag("--ablation-table", a.ablation_table, "run all seven ablation variants of tooltree");
        cmd->add_option("--noise-rate", a.noise_rate, "judge decision error rate");
        cmd->add_option("--flip-mode", a.flip_mode, "both, false_positive_only, false_negative_only");
    }
    cmd->add_option("--budget", a.budgets, "budget sweep, strictly increasing")->expected(1, -1);
    cmd->add_option("--seed", a.seeds, "run seeds")->expected(1, -1);
    cmd->add_option("--noise-seed", a.noise_seed);
    cmd->add_option("--config", a.config_file, "search config file (key = value)");
    cmd->add_option("--set", a.overrides, "config override key=value")->expected(1, -1);
    cmd->add_flag("--events", a.events, "keep per-row event logs (JSON only)");
    cmd->add_flag("--wall-time", a.wall_time, "record measured wall time per cell");
    cmd->add_option("--out", a.out, "report path");
    cmd->add_option("--format", a.format, "json or csv");
    cmd->add_option("--rows", a.rows_log, "append rows as JSON lines while running");
    cmd->add_option("--judge-seconds", a.judge_seconds, "simulated latency per judge call");
    cmd->add_option("--executor-seconds", a.executor_seconds, "simulated latency per tool call");
}

ExperimentSpec make_spec(const RunArgs& a)
{
    ExperimentSpec spec;
    spec.suite_path = a.suite;
    spec.planners.clear();
    for (const auto& p : a.planners) {
        spec.planners.push_back(planner_from_string(p));
    }
    if (!a.config_file.empty()) {
        spec.config = load_search_config(a.config_file);
    }
    for (const auto& kv : a.overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw InvalidConfig("override must be key=value: " + kv);
        }
        apply_config_value(spec.config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    spec.budgets = a.budgets;
    spec.seeds = a.seeds;
    spec.ablation = {a.no_pre_eval, a.no_pre_prune, a.no_post_eval, a.no_post_prune};
    if (a.noise_rate > 0) {
        spec.noise = NoiseConfig{a.noise_rate, parse_flip(a.flip_mode), a.noise_seed};
    }
    spec.output_path = a.out;
    spec.cost = {a.judge_seconds, a.executor_seconds};
    spec.keep_events = a.events;
    spec.measure_wall_time = a.wall_time;
    return spec;
}

void write_out(const RunReport& report, const RunArgs& a)
{
    if (a.out.empty()) {
        return;
    }
    emit_report(report, parse_format(a.format), a.out);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"tooltree: tool planning with tree search"};
    app.require_subcommand(1);

    sim::GeneratorParams gp;
    std::size_t n_tasks = 200;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "write a synthetic task suite");
    gen->add_option("--out", gen_out)->required();
    gen->add_option("--tasks", n_tasks);
    gen->add_option("--seed", gp.seed);
    gen->add_option("--depth-min", gp.chain_depth.lo);
    gen->add_option("--depth-max", gp.chain_depth.hi);
    gen->add_option("--branching-min", gp.branching.lo);
    gen->add_option("--branching-max", gp.branching.hi);
    gen->add_option("--distractors-min", gp.distractor_count.lo);
    gen->add_option("--distractors-max", gp.distractor_count.hi);
    gen->add_option("--inflation", gp.distractor_prior_inflation);
    gen->add_option("--shared-output-rate", gp.shared_output_rate);
    gen->add_option("--root-distractor-rate", gp.root_distractor_rate);
    gen->add_option("--query-source-rate", gp.query_source_rate);
    gen->add_option("--shared-text-rate", gp.shared_text_rate);
    gen->add_option("--shared-distractor-output-rate", gp.shared_distractor_output_rate);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "run planners over a suite");
    add_run_options(run, run_args, true);

    RunArgs restore_args;
    restore_args.planners = {"tooltree"};
    double restore_rate = 0.25;
    auto* restore = app.add_subcommand("restore", "noisy judge vs repaired judges");
    add_run_options(restore, restore_args, false);
    restore->add_option("--rate", restore_rate, "decision error rate");

    std::string report_in, report_out, report_format = "json";
    bool report_rows = false;
    auto* report = app.add_subcommand("report", "re-aggregate an existing report or row log");
    report->add_option("--in", report_in)->required();
    report->add_flag("--row-log", report_rows, "input is a JSON lines row log");
    report->add_option("--out", report_out);
    report->add_option("--format", report_format);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            sim::save_suite(sim::generate_suite(gp, n_tasks), gen_out);
            std::printf("wrote %zu tasks to %s\n", n_tasks, gen_out.c_str());
            return 0;
        }
        if (*run) {
            auto spec = make_spec(run_args);
            auto suite = sim::load_suite(spec.suite_path);
            std::optional<RowLog> log;
            if (!run_args.rows_log.empty()) {
                log.emplace(run_args.rows_log);
            }
            RowSink sink;
            if (log) {
                sink = [&log](const RunRow& r) { (*log)(r); };
            }
            auto rep = run_args.ablation_table ? run_ablation(spec, suite, sink) : run_experiment(spec, suite, sink);
            print_aggregates(rep);
            write_out(rep, run_args);
            return rep.faults() == 0 ? 0 : 1;
        }
        if (*restore) {
            auto spec = make_spec(restore_args);
            spec.noise = NoiseConfig{restore_rate, FlipMode::both, restore_args.noise_seed};
            auto suite = sim::load_suite(spec.suite_path);
            auto rep = run_restoration(spec, suite, restore_rate);
            std::printf("%-22s %12s %8s\n", "configuration", "judge_error", "pass");
            for (const auto& r : rep.rows) {
                std::printf("%-22s %12.4f %8.4f\n", r.configuration.c_str(), r.decision_error_rate, r.pass_rate);
            }
            write_out(rep.runs, restore_args);
            return rep.runs.faults() == 0 ? 0 : 1;
        }
        if (*report) {
            auto rep = report_rows ? load_row_log(report_in, true) : load_report(report_in);
            print_aggregates(rep);
            if (!report_out.empty()) {
                emit_report(rep, parse_format(report_format), report_out);
            }
            return rep.faults() == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
