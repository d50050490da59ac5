#pragma once

#include <tooltree/errors.hpp>
#include <tooltree/harness/experiment.hpp>

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace tooltree::harness {

enum class ReportFormat { json, csv };

/// CSV columns, in order. Event logs are only in the JSON form.
inline const std::vector<std::string>& csv_columns()
{
    static const std::vector<std::string> cols{
        "task_id",   "planner",        "variant",       "budget",      "seed",       "pass",
        "success",   "tool_f1",        "arg_f1",        "plan_f1",     "exec_f1",    "seconds",
        "rollouts",  "nodes_expanded", "executor_calls", "pre_calls",  "post_calls", "judge_calls",
        "cache_hits", "stop_reason",   "noise_decisions", "noise_errors", "fault"};
    return cols;
}

namespace detail {

inline std::string fmt_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace detail

inline nlohmann::json row_to_json(const RunRow& r)
{
    nlohmann::json j{{"task_id", r.task_id},
                     {"planner", r.planner},
                     {"variant", r.variant},
                     {"budget", r.budget},
                     {"seed", r.seed},
                     {"pass", r.metrics.pass},
                     {"success", r.metrics.success},
                     {"tool_f1", r.metrics.tool_f1},
                     {"arg_f1", r.metrics.arg_f1},
                     {"plan_f1", r.metrics.plan_f1},
                     {"exec_f1", r.metrics.exec_f1},
                     {"seconds", r.seconds},
                     {"rollouts", r.rollouts},
                     {"nodes_expanded", r.nodes_expanded},
                     {"executor_calls", r.executor_calls},
                     {"pre_calls", r.pre_calls},
                     {"post_calls", r.post_calls},
                     {"judge_calls", r.judge_calls()},
                     {"cache_hits", r.cache_hits},
                     {"stop_reason", r.stop_reason},
                     {"noise_decisions", r.noise_decisions},
                     {"noise_errors", r.noise_errors},
                     {"fault", r.fault}};
    if (r.wall_seconds) {
        j["wall_seconds"] = *r.wall_seconds;
    }
    if (!r.events.is_null()) {
        j["events"] = r.events;
    }
    return j;
}

inline RunRow row_from_json(const nlohmann::json& j)
{
    RunRow r;
    r.task_id = j.at("task_id").get<std::string>();
    r.planner = j.at("planner").get<std::string>();
    r.variant = j.at("variant").get<std::string>();
    r.budget = j.at("budget").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.metrics.pass = j.at("pass").get<double>();
    r.metrics.success = j.at("success").get<bool>();
    r.metrics.tool_f1 = j.at("tool_f1").get<double>();
    r.metrics.arg_f1 = j.at("arg_f1").get<double>();
    r.metrics.plan_f1 = j.at("plan_f1").get<double>();
    r.metrics.exec_f1 = j.at("exec_f1").get<double>();
    r.seconds = j.at("seconds").get<double>();
    if (j.contains("wall_seconds")) {
        r.wall_seconds = j["wall_seconds"].get<double>();
    }
    r.rollouts = j.at("rollouts").get<std::size_t>();
    r.nodes_expanded = j.at("nodes_expanded").get<std::size_t>();
    r.executor_calls = j.at("executor_calls").get<std::size_t>();
    r.pre_calls = j.at("pre_calls").get<std::size_t>();
    r.post_calls = j.at("post_calls").get<std::size_t>();
    r.cache_hits = j.at("cache_hits").get<std::size_t>();
    r.stop_reason = j.at("stop_reason").get<std::string>();
    r.noise_decisions = j.value("noise_decisions", std::size_t{0});
    r.noise_errors = j.value("noise_errors", std::size_t{0});
    r.fault = j.value("fault", std::string{});
    if (j.contains("events")) {
        r.events = j["events"];
    }
    return r;
}

inline nlohmann::json aggregate_to_json(const Aggregate& a)
{
    return {{"planner", a.planner},
            {"variant", a.variant},
            {"budget", a.budget},
            {"rows", a.rows},
            {"faults", a.faults},
            {"pass_rate", a.pass_rate},
            {"tool_f1", a.tool_f1},
            {"arg_f1", a.arg_f1},
            {"plan_f1", a.plan_f1},
            {"exec_f1", a.exec_f1},
            {"median_nodes", a.median_nodes},
            {"median_rollouts", a.median_rollouts},
            {"mean_seconds", a.mean_seconds},
            {"mean_judge_calls", a.mean_judge_calls},
            {"mean_executor_calls", a.mean_executor_calls},
            {"judge_call_efficiency", a.judge_efficiency},
            {"noise_error_rate", a.noise_error_rate}};
}

inline nlohmann::json report_to_json(const RunReport& report)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back(row_to_json(r));
    }
    nlohmann::json aggs = nlohmann::json::array();
    for (const auto& a : report.aggregates) {
        aggs.push_back(aggregate_to_json(a));
    }
    nlohmann::json eff = nlohmann::json::array();
    for (const auto& s : report.efficiency) {
        nlohmann::json segs = nlohmann::json::array();
        for (const auto& seg : s.segments) {
            segs.push_back({{"from", seg.from_budget},
                            {"to", seg.to_budget},
                            {"efficiency", seg.efficiency ? nlohmann::json(*seg.efficiency) : nlohmann::json()},
                            {"defined", seg.efficiency.has_value()}});
        }
        eff.push_back({{"planner", s.planner}, {"variant", s.variant}, {"segments", segs}});
    }
    return {{"partial", report.partial}, {"rows", rows}, {"aggregates", aggs}, {"efficiency", eff}};
}

/// Rebuilds a report from its rows; stored aggregates are ignored and recomputed.
inline RunReport report_from_json(const nlohmann::json& j)
{
    std::vector<RunRow> rows;
    for (const auto& r : j.at("rows")) {
        rows.push_back(row_from_json(r));
    }
    return finish_report(std::move(rows), j.value("partial", false));
}

inline std::string row_to_csv(const RunRow& r)
{
    using detail::csv_escape;
    using detail::fmt_double;
    std::ostringstream out;
    out << csv_escape(r.task_id) << ',' << csv_escape(r.planner) << ',' << csv_escape(r.variant) << ',' << r.budget
        << ',' << r.seed << ',' << fmt_double(r.metrics.pass) << ',' << (r.metrics.success ? 1 : 0) << ','
        << fmt_double(r.metrics.tool_f1) << ',' << fmt_double(r.metrics.arg_f1) << ','
        << fmt_double(r.metrics.plan_f1) << ',' << fmt_double(r.metrics.exec_f1) << ',' << fmt_double(r.seconds)
        << ',' << r.rollouts << ',' << r.nodes_expanded << ',' << r.executor_calls << ',' << r.pre_calls << ','
        << r.post_calls << ',' << r.judge_calls() << ',' << r.cache_hits << ',' << csv_escape(r.stop_reason) << ','
        << r.noise_decisions << ',' << r.noise_errors << ',' << csv_escape(r.fault);
    return out.str();
}

inline std::string csv_header()
{
    std::string h;
    for (const auto& c : csv_columns()) {
        h += (h.empty() ? "" : ",") + c;
    }
    return h;
}

inline void write_report(std::ostream& out, const RunReport& report, ReportFormat format)
{
    if (format == ReportFormat::json) {
        out << report_to_json(report).dump(1) << '\n';
        return;
    }
    out << csv_header() << '\n';
    for (const auto& r : report.rows) {
        out << row_to_csv(r) << '\n';
    }
}

inline void emit_report(const RunReport& report, ReportFormat format, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoFailure("cannot write " + path);
    }
    write_report(out, report, format);
    if (!out) {
        throw IoFailure("write failed: " + path);
    }
}

inline RunReport load_report(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoFailure("cannot read " + path);
    }
    try {
        return report_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw IoFailure(path + ": " + e.what());
    }
}

/// Appends one JSON object per line; a run that dies midway leaves the earlier rows readable.
class RowLog {
public:
    explicit RowLog(const std::string& path) : out_(path, std::ios::binary)
    {
        if (!out_) {
            throw IoFailure("cannot write " + path);
        }
    }

    void operator()(const RunRow& r)
    {
        out_ << row_to_json(r).dump() << '\n';
        out_.flush();
    }

private:
    std::ofstream out_;
};

/// Reads a row log back; a truncated trailing line marks the report partial.
inline RunReport load_row_log(const std::string& path, bool complete)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoFailure("cannot read " + path);
    }
    std::vector<RunRow> rows;
    std::string line;
    bool partial = !complete;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        try {
            rows.push_back(row_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception&) {
            partial = true;
        }
    }
    return finish_report(std::move(rows), partial);
}

} // namespace tooltree::harness
