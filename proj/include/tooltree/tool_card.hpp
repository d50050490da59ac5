#pragma once

#include <tooltree/errors.hpp>
#include <tooltree/schema.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace tooltree {

struct InputField {
    std::string name;
    SchemaType type;
    bool required = true;

    bool operator==(const InputField&) const = default;
};

struct OutputField {
    std::string name;
    SchemaType type;

    bool operator==(const OutputField&) const = default;
};

struct ToolExample {
    nlohmann::json input = nlohmann::json::object();
    nlohmann::json output = nlohmann::json::object();

    bool operator==(const ToolExample&) const = default;
};

/// Structured description of one tool: identity, typed I/O, domain tags, worked examples.
struct ToolCard {
    std::string name;
    std::string description;
    std::vector<InputField> inputs;
    std::vector<OutputField> outputs;
    std::vector<std::string> domain_tags;
    std::vector<ToolExample> examples;

    bool operator==(const ToolCard&) const = default;

    const InputField* input(const std::string& field) const
    {
        for (const auto& f : inputs) {
            if (f.name == field) {
                return &f;
            }
        }
        return nullptr;
    }
};

/// Every violated card invariant, one string each, naming the offending field.
/// An empty result means the card is valid.
inline std::vector<std::string> validate_card(const ToolCard& card)
{
    std::vector<std::string> violations;
    if (card.name.empty()) {
        violations.emplace_back("name empty");
    }
    std::set<std::string> seen;
    for (const auto& f : card.inputs) {
        if (f.name.empty()) {
            violations.emplace_back("input field with empty name");
        }
        if (!seen.insert(f.name).second) {
            violations.push_back("duplicate input field " + f.name);
        }
        auto nested = schema_violations(f.type, "input." + f.name);
        violations.insert(violations.end(), nested.begin(), nested.end());
    }
    seen.clear();
    for (const auto& f : card.outputs) {
        if (!seen.insert(f.name).second) {
            violations.push_back("duplicate output field " + f.name);
        }
        auto nested = schema_violations(f.type, "output." + f.name);
        violations.insert(violations.end(), nested.begin(), nested.end());
    }
    for (std::size_t i = 0; i < card.examples.size(); ++i) {
        const auto& ex = card.examples[i];
        for (const auto& f : card.inputs) {
            if (f.required && !(ex.input.is_object() && ex.input.contains(f.name))) {
                violations.push_back("example " + std::to_string(i) + " missing required input " + f.name);
            }
        }
    }
    return violations;
}

// JSON mirrors the tool-card metadata table: tool_name, description, input, output,
// example{input, output}. Input descriptors may be {"type": ..., "required": false}
// to mark optional fields. Optional extras: domain_tags, and "examples" as a list.

inline nlohmann::json card_to_json(const ToolCard& card)
{
    nlohmann::json input = nlohmann::json::object();
    for (const auto& f : card.inputs) {
        if (f.required) {
            input[f.name] = schema_to_json(f.type);
        } else {
            auto d = schema_to_json(f.type);
            if (d.is_string()) {
                d = nlohmann::json{{"type", d}};
            }
            d["required"] = false;
            input[f.name] = d;
        }
    }
    nlohmann::json output = nlohmann::json::object();
    for (const auto& f : card.outputs) {
        output[f.name] = schema_to_json(f.type);
    }
    nlohmann::json j{{"tool_name", card.name},
                     {"description", card.description},
                     {"input", input},
                     {"output", output},
                     {"domain_tags", card.domain_tags}};
    if (card.examples.size() == 1) {
        j["example"] = {{"input", card.examples[0].input}, {"output", card.examples[0].output}};
    } else if (!card.examples.empty()) {
        auto list = nlohmann::json::array();
        for (const auto& ex : card.examples) {
            list.push_back({{"input", ex.input}, {"output", ex.output}});
        }
        j["examples"] = list;
    }
    return j;
}

inline ToolCard card_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw InvalidCard("tool card must be a JSON object");
    }
    ToolCard card;
    card.name = j.value("tool_name", std::string{});
    card.description = j.value("description", std::string{});
    const auto input = j.value("input", nlohmann::json::object());
    const auto output = j.value("output", nlohmann::json::object());
    for (const auto& [name, d] : input.items()) {
        bool required = true;
        if (d.is_object() && d.contains("required")) {
            required = d["required"].get<bool>();
        }
        nlohmann::json type_d = d;
        if (d.is_object() && d.contains("type") && d["type"] != "structured") {
            type_d = d["type"];
        }
        card.inputs.push_back(InputField{name, schema_from_json(type_d), required});
    }
    for (const auto& [name, d] : output.items()) {
        card.outputs.push_back(OutputField{name, schema_from_json(d)});
    }
    if (j.contains("domain_tags")) {
        card.domain_tags = j["domain_tags"].get<std::vector<std::string>>();
    }
    auto read_example = [](const nlohmann::json& e) {
        return ToolExample{e.value("input", nlohmann::json::object()), e.value("output", nlohmann::json::object())};
    };
    if (j.contains("example")) {
        card.examples.push_back(read_example(j["example"]));
    }
    for (const auto& e : j.value("examples", nlohmann::json::array())) {
        card.examples.push_back(read_example(e));
    }
    return card;
}

inline ToolCard load_card(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoFailure("cannot open tool card " + path);
    }
    try {
        return card_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidCard(path + ": " + e.what());
    }
}

} // namespace tooltree
