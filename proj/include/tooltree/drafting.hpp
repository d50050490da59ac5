#pragma once

#include <tooltree/context.hpp>
#include <tooltree/errors.hpp>
#include <tooltree/tool_card.hpp>

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace tooltree {

namespace detail {

inline std::optional<Binding> most_recent_compatible(const std::vector<AvailableValue>& values, const SchemaType& type)
{
    for (const auto& v : values) {
        if (v.type == type) {
            return v.source;
        }
    }
    return std::nullopt;
}

} // namespace detail

/// True iff every required input of `card` can be bound from `ctx`. Optional
/// inputs never block a tool.
inline bool is_admissible(const Context& ctx, const ToolCard& card)
{
    auto values = available_values(ctx);
    for (const auto& in : card.inputs) {
        if (in.required && !detail::most_recent_compatible(values, in.type)) {
            return false;
        }
    }
    return true;
}

/// Minimal draft: each required field bound to the most recent type-compatible
/// value (history first, then query attachments, then the query text).
inline ArgumentDraft draft_arguments(const Context& ctx, const ToolCard& card)
{
    auto values = available_values(ctx);
    ArgumentDraft draft;
    for (const auto& in : card.inputs) {
        if (!in.required) {
            continue;
        }
        auto b = detail::most_recent_compatible(values, in.type);
        if (!b) {
            throw NotAdmissible(card.name + ": no value for required input " + in.name);
        }
        draft.bindings.emplace(in.name, *b);
    }
    return draft;
}

/// Draft invariants: every required field bound, every reference resolves to a
/// value of the field's type.
inline bool draft_is_valid(const ArgumentDraft& draft, const ToolCard& card, const Context& ctx)
{
    for (const auto& in : card.inputs) {
        auto it = draft.bindings.find(in.name);
        if (it == draft.bindings.end()) {
            if (in.required) {
                return false;
            }
            continue;
        }
        if (std::holds_alternative<Literal>(it->second)) {
            continue;
        }
        auto t = binding_type(it->second, ctx);
        if (!t || !(*t == in.type)) {
            return false;
        }
    }
    return true;
}

/// Key for the execution cache: tool name plus bindings with field names in
/// sorted order and references spelled as history indices.
inline std::string canonical_cache_key(const std::string& tool_name, const ArgumentDraft& args)
{
    // draft_to_json emits an object; nlohmann objects serialize keys sorted.
    return nlohmann::json::array({tool_name, draft_to_json(args)}).dump();
}

/// Cache key with references replaced by the values they denote in `ctx`, so two
/// calls that would receive the same inputs share a key even on different branches.
inline std::string execution_cache_key(const std::string& tool_name, const ArgumentDraft& args, const Context& ctx)
{
    return canonical_cache_key(tool_name, resolve_draft(args, ctx));
}

} // namespace tooltree
