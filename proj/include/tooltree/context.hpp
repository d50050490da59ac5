#pragma once

#include <tooltree/schema.hpp>

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tooltree {

/// A concrete value bound directly into a draft.
struct Literal {
    nlohmann::json value;
    bool operator==(const Literal&) const = default;
};

/// The user query text itself.
struct QueryTextRef {
    bool operator==(const QueryTextRef&) const = default;
};

/// A typed input that came with the query (an image, an audio clip, ...).
struct AttachmentRef {
    std::size_t index = 0;
    bool operator==(const AttachmentRef&) const = default;
};

/// An output field of an earlier call, addressed by history position.
struct OutputRef {
    std::size_t history_index = 0;
    std::string field;
    bool operator==(const OutputRef&) const = default;
};

using Binding = std::variant<Literal, QueryTextRef, AttachmentRef, OutputRef>;

/// Field name -> binding. std::map keeps field names sorted, which the cache key relies on.
struct ArgumentDraft {
    std::map<std::string, Binding> bindings;
    bool operator==(const ArgumentDraft&) const = default;
};

struct TypedValue {
    SchemaType type;
    nlohmann::json value;
    bool operator==(const TypedValue&) const = default;
};

/// Result of one tool call: either a payload or an error token, never both.
struct ToolOutput {
    std::map<std::string, TypedValue> payload;
    std::optional<std::string> error_token;

    static ToolOutput error(std::string token)
    {
        ToolOutput out;
        out.error_token = std::move(token);
        return out;
    }

    bool ok() const { return !error_token.has_value(); }
    bool operator==(const ToolOutput&) const = default;
};

struct Attachment {
    std::string name;
    TypedValue value;
    bool operator==(const Attachment&) const = default;
};

struct HistoryEntry {
    std::string tool;
    ArgumentDraft args;
    ToolOutput output;
    bool operator==(const HistoryEntry&) const = default;
};

/// The query plus everything executed so far, in order.
struct Context {
    std::string query;
    std::vector<Attachment> attachments;
    std::vector<HistoryEntry> history;

    bool operator==(const Context&) const = default;

    Context with(HistoryEntry entry) const
    {
        Context next = *this;
        next.history.push_back(std::move(entry));
        return next;
    }
};

/// One bindable value in a context together with where it lives.
struct AvailableValue {
    SchemaType type;
    Binding source;
};

/// Every value a draft could bind, most preferred first: history outputs from the
/// most recent call backwards, then query attachments (last first), then the query
/// text. Recomputed from query + history on every call.
inline std::vector<AvailableValue> available_values(const Context& ctx)
{
    std::vector<AvailableValue> out;
    for (std::size_t i = ctx.history.size(); i-- > 0;) {
        const auto& entry = ctx.history[i];
        if (!entry.output.ok()) {
            continue;
        }
        for (const auto& [field, tv] : entry.output.payload) {
            out.push_back(AvailableValue{tv.type, OutputRef{i, field}});
        }
    }
    for (std::size_t i = ctx.attachments.size(); i-- > 0;) {
        out.push_back(AvailableValue{ctx.attachments[i].value.type, AttachmentRef{i}});
    }
    if (!ctx.query.empty()) {
        out.push_back(AvailableValue{SchemaType::text(), QueryTextRef{}});
    }
    return out;
}

/// Value a binding denotes in `ctx`, or nullopt when the reference dangles.
inline std::optional<nlohmann::json> resolve(const Binding& b, const Context& ctx)
{
    if (const auto* lit = std::get_if<Literal>(&b)) {
        return std::optional<nlohmann::json>(std::in_place, lit->value);
    }
    if (std::holds_alternative<QueryTextRef>(b)) {
        return nlohmann::json(ctx.query);
    }
    if (const auto* att = std::get_if<AttachmentRef>(&b)) {
        if (att->index >= ctx.attachments.size()) {
            return std::nullopt;
        }
        return std::optional<nlohmann::json>(std::in_place, ctx.attachments[att->index].value.value);
    }
    const auto& ref = std::get<OutputRef>(b);
    if (ref.history_index >= ctx.history.size()) {
        return std::nullopt;
    }
    const auto& payload = ctx.history[ref.history_index].output.payload;
    auto it = payload.find(ref.field);
    if (it == payload.end()) {
        return std::nullopt;
    }
    return std::optional<nlohmann::json>(std::in_place, it->second.value);
}

/// Type of the value a binding denotes, when it is a reference into the context.
inline std::optional<SchemaType> binding_type(const Binding& b, const Context& ctx)
{
    if (std::holds_alternative<Literal>(b)) {
        return std::nullopt;
    }
    if (std::holds_alternative<QueryTextRef>(b)) {
        return SchemaType::text();
    }
    if (const auto* att = std::get_if<AttachmentRef>(&b)) {
        if (att->index >= ctx.attachments.size()) {
            return std::nullopt;
        }
        return ctx.attachments[att->index].value.type;
    }
    const auto& ref = std::get<OutputRef>(b);
    if (ref.history_index >= ctx.history.size()) {
        return std::nullopt;
    }
    const auto& payload = ctx.history[ref.history_index].output.payload;
    auto it = payload.find(ref.field);
    if (it == payload.end()) {
        return std::nullopt;
    }
    return it->second.type;
}

/// Same draft with every reference replaced by the literal it denotes.
inline ArgumentDraft resolve_draft(const ArgumentDraft& draft, const Context& ctx)
{
    ArgumentDraft out;
    for (const auto& [field, b] : draft.bindings) {
        auto v = resolve(b, ctx);
        out.bindings.emplace(field, Literal{v.value_or(nlohmann::json())});
    }
    return out;
}

// ---- JSON ----

inline nlohmann::json binding_to_json(const Binding& b)
{
    return std::visit(
        [](const auto& v) -> nlohmann::json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Literal>) {
                return {{"lit", v.value}};
            } else if constexpr (std::is_same_v<T, QueryTextRef>) {
                return {{"query", 0}};
            } else if constexpr (std::is_same_v<T, AttachmentRef>) {
                return {{"att", v.index}};
            } else {
                return {{"ref", {v.history_index, v.field}}};
            }
        },
        b);
}

inline Binding binding_from_json(const nlohmann::json& j)
{
    if (j.contains("lit")) {
        return Literal{j["lit"]};
    }
    if (j.contains("query")) {
        return QueryTextRef{};
    }
    if (j.contains("att")) {
        return AttachmentRef{j["att"].get<std::size_t>()};
    }
    const auto& r = j.at("ref");
    return OutputRef{r.at(0).get<std::size_t>(), r.at(1).get<std::string>()};
}

inline nlohmann::json draft_to_json(const ArgumentDraft& d)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [field, b] : d.bindings) {
        j[field] = binding_to_json(b);
    }
    return j;
}

inline ArgumentDraft draft_from_json(const nlohmann::json& j)
{
    ArgumentDraft d;
    for (const auto& [field, b] : j.items()) {
        d.bindings.emplace(field, binding_from_json(b));
    }
    return d;
}

inline nlohmann::json typed_value_to_json(const TypedValue& v)
{
    return {{"type", schema_to_json(v.type)}, {"value", v.value}};
}

inline TypedValue typed_value_from_json(const nlohmann::json& j)
{
    return TypedValue{schema_from_json(j.at("type")), j.at("value")};
}

inline nlohmann::json output_to_json(const ToolOutput& o)
{
    if (o.error_token) {
        return {{"error_token", *o.error_token}};
    }
    nlohmann::json payload = nlohmann::json::object();
    for (const auto& [field, v] : o.payload) {
        payload[field] = typed_value_to_json(v);
    }
    return {{"payload", payload}};
}

inline ToolOutput output_from_json(const nlohmann::json& j)
{
    if (j.contains("error_token")) {
        return ToolOutput::error(j["error_token"].get<std::string>());
    }
    ToolOutput o;
    for (const auto& [field, v] : j.at("payload").items()) {
        o.payload.emplace(field, typed_value_from_json(v));
    }
    return o;
}

/// Plain value view of an output, as a judge would see it.
inline nlohmann::json output_values(const ToolOutput& o)
{
    if (o.error_token) {
        return {{"error_token", *o.error_token}};
    }
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [field, v] : o.payload) {
        j[field] = v.value;
    }
    return j;
}

inline nlohmann::json context_to_json(const Context& c)
{
    auto atts = nlohmann::json::array();
    for (const auto& a : c.attachments) {
        atts.push_back({{"name", a.name}, {"value", typed_value_to_json(a.value)}});
    }
    auto hist = nlohmann::json::array();
    for (const auto& h : c.history) {
        hist.push_back({{"tool", h.tool}, {"args", draft_to_json(h.args)}, {"output", output_to_json(h.output)}});
    }
    return {{"query", c.query}, {"attachments", atts}, {"history", hist}};
}

inline Context context_from_json(const nlohmann::json& j)
{
    Context c;
    c.query = j.value("query", std::string{});
    for (const auto& a : j.value("attachments", nlohmann::json::array())) {
        c.attachments.push_back(Attachment{a.at("name").get<std::string>(), typed_value_from_json(a.at("value"))});
    }
    for (const auto& h : j.value("history", nlohmann::json::array())) {
        c.history.push_back(HistoryEntry{h.at("tool").get<std::string>(), draft_from_json(h.at("args")),
                                         output_from_json(h.at("output"))});
    }
    return c;
}

} // namespace tooltree
