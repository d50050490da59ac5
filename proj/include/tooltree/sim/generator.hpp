#pragma once

#include <tooltree/drafting.hpp>
#include <tooltree/errors.hpp>
#include <tooltree/retrieval.hpp>
#include <tooltree/sim/task.hpp>

#include <algorithm>
#include <cmath>
#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tooltree::sim {

struct IntRange {
    int lo = 0;
    int hi = 0;
    bool operator==(const IntRange&) const = default;
};

struct GeneratorParams {
    std::uint64_t seed = 0;
    IntRange chain_depth{3, 5};
    IntRange branching{2, 3};
    IntRange distractor_count{6, 10};
    double distractor_prior_inflation = 0.5;
    double shared_output_rate = 1.0; // inner gold step emits plain text or a number
    double root_distractor_rate = 0.35; // distractor reads the query or image
    double shared_distractor_output_rate = 0.35;
    double query_source_rate = 0.5; // source step reads the query instead of the image
    double shared_text_rate = 1.0;

    void validate() const
    {
        auto range = [](const IntRange& r, int min, const char* what) {
            if (r.lo < min || r.hi < r.lo) {
                throw InvalidParams(std::string(what) + " range is empty or below " + std::to_string(min));
            }
        };
        range(chain_depth, 1, "chain_depth");
        range(branching, 1, "branching");
        range(distractor_count, 0, "distractor_count");
        auto unit = [](double v, const char* what) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw InvalidParams(std::string(what) + " must be in [0,1]");
            }
        };
        unit(distractor_prior_inflation, "distractor_prior_inflation");
        unit(shared_output_rate, "shared_output_rate");
        unit(root_distractor_rate, "root_distractor_rate");
        unit(shared_distractor_output_rate, "shared_distractor_output_rate");
        unit(query_source_rate, "query_source_rate");
        unit(shared_text_rate, "shared_text_rate");
    }
};

namespace detail {

inline constexpr std::array<std::string_view, 40> kVerbs{
    "scan",    "parse",   "rank",    "merge",   "filter",  "align",   "tally",   "index",   "render",  "extract",
    "segment", "encode",  "decode",  "resolve", "measure", "sample",  "cluster", "label",   "refine",  "project",
    "lookup",  "compose", "split",   "verify",  "estimate", "convert", "annotate", "crop",   "track",   "summarize",
    "query",   "fetch",   "score",   "match",   "localize", "trace",  "collect", "reduce",  "expand",  "translate"};

inline constexpr std::array<std::string_view, 40> kNouns{
    "ledger",  "spectra",  "tiles",   "grid",    "masks",   "frames",  "tokens",  "regions", "labels",  "vectors",
    "graph",   "table",    "schema",  "records", "signals", "layers",  "points",  "patches", "edges",   "bins",
    "archive", "manifest", "catalog", "payload", "sketch",  "outline", "digest",  "lattice", "profile", "trail",
    "batch",   "chart",    "index",   "stream",  "bundle",  "slices",  "anchors", "markers", "traces",  "shards"};

inline constexpr std::array<std::string_view, 12> kScenes{"street", "kitchen", "harbor", "warehouse", "orchard",
                                                          "parking", "stadium", "market", "airport", "garden",
                                                          "library", "factory"};
inline constexpr std::array<std::string_view, 12> kObjects{"cars",    "wheels", "boxes",  "bottles", "trees",  "boats",
                                                           "bicycles", "chairs", "crates", "lamps",   "windows", "cones"};
inline constexpr std::array<std::string_view, 8> kAnswers{"total", "count", "number", "sum",
                                                          "tally", "amount", "quantity", "figure"};
inline constexpr std::array<std::string_view, 12> kFiller{
    "returns", "structured", "summaries", "given", "input", "using", "fast", "heuristic",
    "produces", "compact",   "results",   "from"};

/// Small deterministic helper over a 64-bit engine; avoids implementation-defined
/// standard distributions so suites reproduce across standard libraries.
class Draw {
public:
    explicit Draw(std::uint64_t seed, std::uint64_t index)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x7f4a7c15u};
        rng_.seed(seq);
    }

    double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    bool chance(double p) { return unit() < p; }
    int between(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

    template <class C>
    const auto& pick(const C& c)
    {
        return c[below(c.size())];
    }

    template <class V>
    void shuffle(V& v)
    {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 rng_;
};

struct Blueprint {
    struct Step {
        int branch = 0;
        std::vector<std::size_t> deps;
        std::vector<SchemaType> inputs;
        std::vector<std::string> input_sources; ///< "query", "image" or "step:<i>"
        SchemaType output;
    };
    std::vector<Step> steps;
};

inline SchemaType unique_type(std::string_view noun, int serial)
{
    return SchemaType::structured({{std::string(noun) + "_" + std::to_string(serial), SchemaType::text()}});
}

inline SchemaType shared_type(Draw& d, double text_rate) { return d.chance(text_rate) ? SchemaType::text() : SchemaType::number(); }

inline Blueprint draw_blueprint(Draw& d, int depth, int branching, double shared_rate, double query_rate, double text_rate,
                                int& serial)
{
    Blueprint bp;
    int branches = std::max(1, std::min(branching, depth - 1));
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(branches));
    for (int i = 0; i + 1 < depth; ++i) {
        members[static_cast<std::size_t>(i % branches)].push_back(static_cast<std::size_t>(i));
    }
    bp.steps.resize(static_cast<std::size_t>(depth));
    for (std::size_t b = 0; b < members.size(); ++b) {
        const auto& chain = members[b];
        for (std::size_t k = 0; k < chain.size(); ++k) {
            auto& s = bp.steps[chain[k]];
            s.branch = static_cast<int>(b);
            bool tail = k + 1 == chain.size();
            if (!tail && d.chance(shared_rate)) {
                s.output = shared_type(d, text_rate);
            } else {
                s.output = unique_type(d.pick(kNouns), serial++);
            }
            if (k == 0) {
                bool image = !d.chance(query_rate);
                s.inputs.push_back(image ? SchemaType::image_ref() : SchemaType::text());
                s.input_sources.push_back(image ? "image" : "query");
            } else {
                s.deps.push_back(chain[k - 1]);
                s.inputs.push_back(bp.steps[chain[k - 1]].output);
                s.input_sources.push_back("step:" + std::to_string(chain[k - 1]));
            }
        }
    }
    auto& last = bp.steps.back();
    if (depth == 1) {
        last.inputs.push_back(SchemaType::image_ref());
        last.input_sources.push_back("image");
    } else {
        for (const auto& chain : members) {
            last.deps.push_back(chain.back());
            last.inputs.push_back(bp.steps[chain.back()].output);
            last.input_sources.push_back("step:" + std::to_string(chain.back()));
        }
    }
    last.output = unique_type("answer", serial++);
    return bp;
}

inline std::string describe_words(Draw& d, const std::set<std::string>& banned, int n)
{
    std::string out;
    int added = 0;
    for (int guard = 0; added < n && guard < 200; ++guard) {
        std::string w(d.pick(kFiller));
        if (d.chance(0.5)) {
            w = std::string(d.pick(kNouns));
        }
        if (banned.count(w)) {
            continue;
        }
        out += (out.empty() ? "" : " ") + w;
        ++added;
    }
    return out;
}

/// First execution order (lowest ready index first, depth-first) under which every
/// gold step succeeds, or empty when the blueprint admits none.
inline std::vector<std::size_t> find_gold_order(const SyntheticTask& task, const std::vector<GoldStep>& steps)
{
    std::vector<std::size_t> order;
    std::vector<bool> done(steps.size(), false);
    std::function<bool(const Context&)> dfs = [&](const Context& ctx) {
        if (order.size() == steps.size()) {
            return true;
        }
        for (std::size_t i = 0; i < steps.size(); ++i) {
            if (done[i]) {
                continue;
            }
            bool ready = std::all_of(steps[i].deps.begin(), steps[i].deps.end(), [&](auto k) { return done[k]; });
            if (!ready) {
                continue;
            }
            const auto* tool = task.tool(steps[i].tool);
            if (!is_admissible(ctx, tool->card)) {
                continue;
            }
            auto draft = draft_arguments(ctx, tool->card);
            auto out = execute_sim_tool(*tool, draft, ctx);
            if (!out.ok()) {
                continue;
            }
            done[i] = true;
            order.push_back(i);
            if (dfs(ctx.with({tool->card.name, draft, out}))) {
                return true;
            }
            order.pop_back();
            done[i] = false;
        }
        return false;
    };
    if (!dfs(task.initial_context())) {
        return {};
    }
    return order;
}

} // namespace detail

/// Deterministic in (params.seed, index).
inline SyntheticTask generate_task(const GeneratorParams& params, std::size_t index)
{
    params.validate();
    detail::Draw d(params.seed, index);
    const int depth = d.between(params.chain_depth.lo, params.chain_depth.hi);
    const int branching = d.between(params.branching.lo, params.branching.hi);
    const int distractors = d.between(params.distractor_count.lo, params.distractor_count.hi);

    SyntheticTask t;
    t.task_id = "t" + std::to_string(params.seed) + "-" + std::to_string(index);
    t.seed = params.seed;
    t.index = index;
    t.difficulty = {depth, branching, distractors};
    t.planted_count = d.between(2, 12);
    const std::string scene(d.pick(detail::kScenes));
    const std::string object(d.pick(detail::kObjects));
    const std::string answer(d.pick(detail::kAnswers));
    t.query = "Look at the attached " + scene + " photo and report the " + answer + " of " + object + " in view.";
    const std::string image_token = "img:" + t.task_id;
    t.attachments.push_back({"photo", {SchemaType::image_ref(), image_token}});

    std::set<std::string> keywords;
    for (auto& w : tokenize(t.query)) {
        keywords.insert(std::move(w));
    }

    std::set<std::string> used;
    auto fresh_name = [&] {
        while (true) {
            std::string verb(d.pick(detail::kVerbs));
            std::string noun(d.pick(detail::kNouns));
            std::string name = verb + "_" + noun;
            if (!keywords.count(verb) && !keywords.count(noun) && used.insert(name).second) {
                return name;
            }
        }
    };
    std::vector<std::string> gold_names;
    for (int i = 0; i < depth; ++i) {
        gold_names.push_back(fresh_name());
    }

    int serial = 0;
    std::vector<SimTool> gold;
    std::vector<GoldStep> plan;
    for (int attempt = 0;; ++attempt) {
        if (attempt == 64) {
            throw InvalidParams("no solvable gold plan found for task " + t.task_id);
        }
        auto bp = detail::draw_blueprint(d, depth, branching, params.shared_output_rate, params.query_source_rate,
                                         params.shared_text_rate, serial);
        gold.clear();
        plan.clear();
        std::vector<std::string> tokens;
        for (std::size_t i = 0; i < bp.steps.size(); ++i) {
            const auto& step = bp.steps[i];
            bool from_image = std::find(step.input_sources.begin(), step.input_sources.end(), "image")
                              != step.input_sources.end();
            tokens.push_back("out:" + gold_names[i] + ":result" + (from_image ? ":n=" + std::to_string(t.planted_count) : ""));
        }
        for (std::size_t i = 0; i < bp.steps.size(); ++i) {
            const auto& step = bp.steps[i];
            SimTool tool;
            tool.role = ToolRole::gold;
            tool.card.name = gold_names[i];
            auto cut = gold_names[i].find('_');
            tool.card.description = gold_names[i].substr(0, cut) + " " + gold_names[i].substr(cut + 1) + " "
                                    + detail::describe_words(d, keywords, 4);
            for (std::size_t j = 0; j < step.inputs.size(); ++j) {
                std::string field = step.inputs.size() == 1 ? "input" : "part_" + std::to_string(j);
                tool.card.inputs.push_back({field, step.inputs[j], true});
                const auto& src = step.input_sources[j];
                if (src == "image") {
                    tool.expects[field] = image_token;
                } else if (src == "query") {
                    tool.expects[field] = t.query;
                } else {
                    tool.expects[field] = tokens[std::stoul(src.substr(5))];
                }
            }
            tool.card.outputs.push_back({"result", step.output});
            tool.produces["result"] = tokens[i];
            gold.push_back(std::move(tool));
            plan.push_back({gold_names[i], step.deps});
        }
        t.tools = gold;
        auto order = detail::find_gold_order(t, plan);
        if (order.empty()) {
            continue;
        }
        std::vector<std::size_t> position(order.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            position[order[k]] = k;
        }
        std::vector<GoldStep> ordered;
        for (auto i : order) {
            GoldStep g = plan[i];
            for (auto& dep : g.deps) {
                dep = position[dep];
            }
            std::sort(g.deps.begin(), g.deps.end());
            ordered.push_back(std::move(g));
        }
        t.gold_plan = std::move(ordered);
        break;
    }

    std::vector<SchemaType> inner_types;
    for (std::size_t i = 0; i + 1 < gold.size(); ++i) {
        inner_types.push_back(gold[i].card.outputs.front().type);
    }
    const int traps = static_cast<int>(std::lround(params.distractor_prior_inflation * distractors));
    for (int j = 0; j < distractors; ++j) {
        SimTool tool;
        tool.role = j < traps ? ToolRole::trap : ToolRole::distractor;
        tool.card.name = fresh_name();
        SchemaType in;
        if (inner_types.empty() || d.chance(params.root_distractor_rate)) {
            in = d.chance(0.5) ? SchemaType::image_ref() : SchemaType::text();
        } else {
            in = d.pick(inner_types);
        }
        tool.card.inputs.push_back({"input", in, true});
        SchemaType out = d.chance(params.shared_distractor_output_rate) ? detail::shared_type(d, params.shared_text_rate)
                                                                        : detail::unique_type(d.pick(detail::kNouns), serial++);
        tool.card.outputs.push_back({"result", out});
        tool.produces["result"] = "out:" + tool.card.name + ":result";
        auto cut = tool.card.name.find('_');
        std::string lead = tool.card.name.substr(0, cut) + " " + tool.card.name.substr(cut + 1);
        if (tool.role == ToolRole::trap) {
            tool.card.description = lead + " to report the " + answer + " of " + object + " in any " + scene
                                    + " photo";
        } else {
            tool.card.description = lead + " " + detail::describe_words(d, keywords, 4);
        }
        t.tools.push_back(std::move(tool));
    }
    d.shuffle(t.tools);
    return t;
}

inline std::vector<SyntheticTask> generate_suite(const GeneratorParams& params, std::size_t count)
{
    std::vector<SyntheticTask> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(generate_task(params, i));
    }
    return out;
}

} // namespace tooltree::sim
