#pragma once

#include <tooltree/errors.hpp>

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace tooltree {

struct JudgeVerdict {
    double score = 0.0;
    std::string explanation;
    bool clamped = false; ///< the raw score was outside [0,1]
};

namespace detail {

inline std::optional<JudgeVerdict> verdict_from(const nlohmann::json& j, int depth);

inline std::optional<JudgeVerdict> verdict_in_text(std::string_view raw, int depth)
{
    if (depth > 4) {
        return std::nullopt;
    }
    for (std::size_t start = raw.find('{'); start != std::string_view::npos; start = raw.find('{', start + 1)) {
        // walk to the matching brace, skipping string literals
        int level = 0;
        bool in_string = false;
        bool escape = false;
        for (std::size_t i = start; i < raw.size(); ++i) {
            char c = raw[i];
            if (in_string) {
                if (escape) {
                    escape = false;
                } else if (c == '\\') {
                    escape = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++level;
            } else if (c == '}' && --level == 0) {
                auto parsed = nlohmann::json::parse(raw.substr(start, i - start + 1), nullptr, false);
                if (!parsed.is_discarded()) {
                    if (auto v = verdict_from(parsed, depth)) {
                        return v;
                    }
                }
                break;
            }
        }
    }
    return std::nullopt;
}

inline std::optional<JudgeVerdict> verdict_from(const nlohmann::json& j, int depth)
{
    if (j.is_object()) {
        auto it = j.find("score");
        if (it != j.end() && it->is_number()) {
            JudgeVerdict v;
            double raw = it->get<double>();
            v.score = raw < 0.0 ? 0.0 : (raw > 1.0 ? 1.0 : raw);
            v.clamped = v.score != raw;
            auto e = j.find("explanation");
            if (e != j.end() && e->is_string()) {
                v.explanation = e->get<std::string>();
            }
            return v;
        }
    }
    // chat-completion style envelopes carry the verdict nested or inside a string
    if (j.is_object() || j.is_array()) {
        for (const auto& child : j) {
            if (auto v = verdict_from(child, depth + 1)) {
                return v;
            }
        }
    } else if (j.is_string()) {
        return verdict_in_text(j.get_ref<const std::string&>(), depth + 1);
    }
    return std::nullopt;
}

} // namespace detail

/// Extracts {"score": x, "explanation": "..."} from a judge response. Out-of-range
/// scores are clamped and flagged. Throws MalformedVerdict when no object with a
/// numeric score is present.
inline JudgeVerdict parse_verdict(std::string_view raw)
{
    if (auto v = detail::verdict_in_text(raw, 0)) {
        return *v;
    }
    throw MalformedVerdict("no JSON object with a numeric \"score\" in judge response");
}

} // namespace tooltree
