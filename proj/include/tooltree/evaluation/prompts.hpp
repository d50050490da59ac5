#pragma once

#include <tooltree/evaluation/evaluator.hpp>

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <string_view>
#include <utility>

namespace tooltree {

/// Bumped whenever the judge templates below change.
inline constexpr std::string_view kPromptTemplateVersion = "judge-templates/v1";

inline constexpr std::string_view kPreSystemTemplate =
    R"(Role. You are a strict tool-planning judge for a language-agent that
solves user tasks by calling tools in sequence.

Inputs. You are given:
  - the original user query and current conversation context;
  - a tool card (name, description, I/O schema, examples);
  - a concrete argument draft that is syntactically valid for the tool.

Output format. You must output a single JSON object with:
  - "score": a real number between 0.0 and 1.0 (inclusive)
    measuring how promising this tool call is before running it;
  - "explanation": a brief natural-language justification
    (2--4 sentences).

Scoring guideline. Use a coarse scale in [0,1]. There is
no need to finely distinguish every small difference; choose a value that
roughly reflects your judgment of usefulness.

What to penalize. Give low scores to candidate tool calls that:
  - mismatch the required modality or domain;
  - ignore key constraints or required fields in the schema;
  - duplicate a previous call with effectively identical arguments and
    no clear new benefit;
  - are speculative when a more direct or specific tool is available.

Important. Do not simulate the tool output; you are judging
only the promised usefulness of this tool call as the next action.)";

inline constexpr std::string_view kPreUserTemplate =
    R"(Context.
  - User query: {USER_QUERY}
  - Current dialog / planning context: {CURRENT_CONTEXT}

Candidate tool card.
  - Name: {TOOL_NAME}
  - Description: {TOOL_DESCRIPTION}
  - Input schema: {TOOL_INPUT_SCHEMA}
  - Output schema: {TOOL_OUTPUT_SCHEMA}
  - Example uses (if any): {TOOL_EXAMPLES}

Candidate argument draft.
  - Arguments to pass into the tool: {ARGUMENT_DRAFT_JSON}

Task: Decide how promising it is to execute this tool call
next for solving the user's query, given the current state of the
conversation and prior tool calls. Please respond only with a JSON
object of the form
{"score": <float between 0.0 and 1.0>, "explanation": "<2--4 sentence explanation>"}.)";

inline constexpr std::string_view kPostSystemTemplate =
    R"(Role. You are a strict tool-planning judge for a language-agent that
solves user tasks by calling tools in sequence.

Inputs. You are given:
  - the original user query and conversation context before the call;
  - the tool card;
  - the concrete arguments that were used;
  - the actual tool output.

Output format. You must output a single JSON object with:
  - "score": a real number between 0.0 and 1.0 (inclusive)
    measuring the grounded utility of this executed tool call;
  - "explanation": a brief natural-language justification
    (2--4 sentences).

Scoring guideline. Use a coarse scale in [0,1]. Choose a
value that roughly reflects how helpful this call was; you do not need to
finely distinguish very small differences.

When assigning the score, consider:
  - Task-consistency: does the output address the user's query
    or current sub-goal?
  - Correctness / plausibility: are there obvious errors or
    contradictions?
  - Relevance: is the output focused on what is needed now,
    rather than generic or noisy?
  - Constraint satisfaction: does it respect safety,
    formatting, and domain constraints?

Important. You are judging only this tool call's incremental
contribution from the previous context to the new context. Do not
re-evaluate the entire plan.)";

inline constexpr std::string_view kPostUserTemplate =
    R"(Context.
  - User query: {USER_QUERY}
  - Dialog / planning context before this call:
    {CONTEXT_BEFORE_CALL}

Executed tool card.
  - Name: {TOOL_NAME}
  - Description: {TOOL_DESCRIPTION}
  - Input schema: {TOOL_INPUT_SCHEMA}
  - Output schema: {TOOL_OUTPUT_SCHEMA}
  - Example uses (if any): {TOOL_EXAMPLES}

Call details.
  - Arguments actually used: {ARGUMENT_JSON}
  - Tool output (raw): {TOOL_OUTPUT_RAW}

Task: Evaluate how much this executed tool call actually
helped with solving the user's query, considering correctness, relevance,
and progress toward a final answer. Please respond only with a JSON
object of the form
{"score": <float between 0.0 and 1.0>, "explanation": "<2--4 sentence explanation>"}.)";

inline constexpr std::string_view kNoPriorCalls = "(no prior tool calls)";

struct JudgePrompt {
    std::string system;
    std::string user;

    bool operator==(const JudgePrompt&) const = default;
};

namespace detail {

/// Single pass over `text`: every "{SLOT}" with a known name is replaced; values are
/// never rescanned.
inline std::string render_template(std::string_view text, const std::map<std::string, std::string>& slots)
{
    std::string out;
    out.reserve(text.size() * 2);
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '{') {
            auto close = text.find('}', i);
            if (close != std::string_view::npos) {
                auto it = slots.find(std::string(text.substr(i + 1, close - i - 1)));
                if (it != slots.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(text[i++]);
    }
    return out;
}

inline std::string render_history(const Context& ctx)
{
    if (ctx.history.empty()) {
        return std::string(kNoPriorCalls);
    }
    std::string out;
    for (std::size_t i = 0; i < ctx.history.size(); ++i) {
        const auto& h = ctx.history[i];
        if (!out.empty()) {
            out += "\n    ";
        }
        out += "[" + std::to_string(i + 1) + "] " + h.tool + " " + draft_to_json(resolve_draft(h.args, ctx)).dump() +
               " -> " + output_values(h.output).dump();
    }
    return out;
}

inline nlohmann::json input_schema_json(const ToolCard& card)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& f : card.inputs) {
        j[f.name] = {{"type", schema_to_json(f.type)}, {"required", f.required}};
    }
    return j;
}

inline nlohmann::json output_schema_json(const ToolCard& card)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& f : card.outputs) {
        j[f.name] = schema_to_json(f.type);
    }
    return j;
}

inline std::string examples_text(const ToolCard& card)
{
    if (card.examples.empty()) {
        return "(none)";
    }
    auto list = nlohmann::json::array();
    for (const auto& ex : card.examples) {
        list.push_back({{"input", ex.input}, {"output", ex.output}});
    }
    return list.dump();
}

inline nlohmann::json argument_values(const ArgumentDraft& draft, const Context& ctx)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [field, b] : draft.bindings) {
        j[field] = resolve(b, ctx).value_or(nlohmann::json());
    }
    return j;
}

inline void card_slots(std::map<std::string, std::string>& slots, const ToolCard& card)
{
    slots["TOOL_NAME"] = card.name;
    slots["TOOL_DESCRIPTION"] = card.description;
    slots["TOOL_INPUT_SCHEMA"] = input_schema_json(card).dump();
    slots["TOOL_OUTPUT_SCHEMA"] = output_schema_json(card).dump();
    slots["TOOL_EXAMPLES"] = examples_text(card);
}

} // namespace detail

inline JudgePrompt render_pre_prompt(const PreRequest& request)
{
    std::map<std::string, std::string> slots;
    detail::card_slots(slots, request.card);
    slots["USER_QUERY"] = request.context.query;
    slots["CURRENT_CONTEXT"] = detail::render_history(request.context);
    slots["ARGUMENT_DRAFT_JSON"] = detail::argument_values(request.draft, request.context).dump();
    return JudgePrompt{std::string(kPreSystemTemplate), detail::render_template(kPreUserTemplate, slots)};
}

inline JudgePrompt render_post_prompt(const PostRequest& request)
{
    std::map<std::string, std::string> slots;
    detail::card_slots(slots, request.card);
    slots["USER_QUERY"] = request.context_before.query;
    slots["CONTEXT_BEFORE_CALL"] = detail::render_history(request.context_before);
    slots["ARGUMENT_JSON"] = detail::argument_values(request.draft, request.context_before).dump();
    slots["TOOL_OUTPUT_RAW"] =
        request.output.error_token ? *request.output.error_token : output_values(request.output).dump();
    return JudgePrompt{std::string(kPostSystemTemplate), detail::render_template(kPostUserTemplate, slots)};
}

} // namespace tooltree
