#pragma once

#include <tooltree/errors.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tooltree {

enum class SchemaKind { text, number, boolean, image_ref, audio_ref, structured };

inline std::string_view to_string(SchemaKind kind)
{
    switch (kind) {
    case SchemaKind::text: return "text";
    case SchemaKind::number: return "number";
    case SchemaKind::boolean: return "boolean";
    case SchemaKind::image_ref: return "image-ref";
    case SchemaKind::audio_ref: return "audio-ref";
    case SchemaKind::structured: return "structured";
    }
    return "text";
}

inline std::optional<SchemaKind> schema_kind_from_string(std::string_view name)
{
    for (auto kind : {SchemaKind::text, SchemaKind::number, SchemaKind::boolean, SchemaKind::image_ref,
                      SchemaKind::audio_ref, SchemaKind::structured}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    return std::nullopt;
}

struct SchemaField;

/// A typed slot. Structured types carry named fields; two types are compatible
/// only when they are equal (no cross-kind coercion).
struct SchemaType {
    SchemaKind kind = SchemaKind::text;
    std::vector<SchemaField> fields;

    static SchemaType of(SchemaKind k) { return SchemaType{k, {}}; }
    static SchemaType text() { return of(SchemaKind::text); }
    static SchemaType number() { return of(SchemaKind::number); }
    static SchemaType boolean() { return of(SchemaKind::boolean); }
    static SchemaType image_ref() { return of(SchemaKind::image_ref); }
    static SchemaType audio_ref() { return of(SchemaKind::audio_ref); }
    static SchemaType structured(std::vector<SchemaField> fields);

    bool operator==(const SchemaType& other) const;
    bool operator<(const SchemaType& other) const;
};

struct SchemaField {
    std::string name;
    SchemaType type;

    bool operator==(const SchemaField& other) const = default;
};

inline SchemaType SchemaType::structured(std::vector<SchemaField> fields)
{
    // field order is not significant; keep it sorted so equality is by content
    std::stable_sort(fields.begin(), fields.end(),
                     [](const SchemaField& a, const SchemaField& b) { return a.name < b.name; });
    return SchemaType{SchemaKind::structured, std::move(fields)};
}

inline bool SchemaType::operator==(const SchemaType& other) const
{
    return kind == other.kind && fields == other.fields;
}

inline bool SchemaType::operator<(const SchemaType& other) const
{
    if (kind != other.kind) {
        return kind < other.kind;
    }
    return std::lexicographical_compare(fields.begin(), fields.end(), other.fields.begin(), other.fields.end(),
                                        [](const SchemaField& a, const SchemaField& b) {
                                            if (a.name != b.name) {
                                                return a.name < b.name;
                                            }
                                            return a.type < b.type;
                                        });
}

/// Violations of the structured-type invariants (non-empty, unique field names), recursively.
inline std::vector<std::string> schema_violations(const SchemaType& type, const std::string& where)
{
    std::vector<std::string> out;
    if (type.kind != SchemaKind::structured) {
        return out;
    }
    if (type.fields.empty()) {
        out.push_back(where + ": structured type has no fields");
    }
    std::set<std::string> seen;
    for (const auto& f : type.fields) {
        if (!seen.insert(f.name).second) {
            out.push_back(where + ": duplicate field " + f.name);
        }
        auto nested = schema_violations(f.type, where + "." + f.name);
        out.insert(out.end(), nested.begin(), nested.end());
    }
    return out;
}

// Type descriptors on the wire: a bare kind name ("text", "image-ref", ...) or an
// object {"type": "structured", "fields": {name: descriptor, ...}}.

inline nlohmann::json schema_to_json(const SchemaType& type)
{
    if (type.kind != SchemaKind::structured) {
        return std::string(to_string(type.kind));
    }
    nlohmann::json fields = nlohmann::json::object();
    for (const auto& f : type.fields) {
        fields[f.name] = schema_to_json(f.type);
    }
    return {{"type", "structured"}, {"fields", fields}};
}

inline SchemaType schema_from_json(const nlohmann::json& j)
{
    if (j.is_string()) {
        auto kind = schema_kind_from_string(j.get<std::string>());
        if (!kind) {
            throw InvalidCard("unknown type descriptor: " + j.get<std::string>());
        }
        if (*kind == SchemaKind::structured) {
            throw InvalidCard("structured type descriptor needs fields");
        }
        return SchemaType::of(*kind);
    }
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
        throw InvalidCard("type descriptor must be a kind name or an object with \"type\"");
    }
    auto kind = schema_kind_from_string(j["type"].get<std::string>());
    if (!kind) {
        throw InvalidCard("unknown type descriptor: " + j["type"].get<std::string>());
    }
    if (*kind != SchemaKind::structured) {
        return SchemaType::of(*kind);
    }
    std::vector<SchemaField> fields;
    const auto listed = j.value("fields", nlohmann::json::object());
    for (const auto& [name, sub] : listed.items()) {
        fields.push_back(SchemaField{name, schema_from_json(sub)});
    }
    return SchemaType::structured(std::move(fields));
}

inline std::string describe(const SchemaType& type)
{
    return schema_to_json(type).dump();
}

} // namespace tooltree
