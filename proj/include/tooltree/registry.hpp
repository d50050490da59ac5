#pragma once

#include <tooltree/errors.hpp>
#include <tooltree/tool_card.hpp>

#include <map>
#include <string>
#include <vector>

namespace tooltree {

/// Name-indexed set of validated tool cards. Iteration is in name order.
class ToolRegistry {
public:
    ToolRegistry() = default;

    const ToolCard& at(const std::string& name) const
    {
        auto it = cards_.find(name);
        if (it == cards_.end()) {
            throw Error("unknown tool: " + name);
        }
        return it->second;
    }

    const ToolCard* find(const std::string& name) const
    {
        auto it = cards_.find(name);
        return it == cards_.end() ? nullptr : &it->second;
    }

    bool contains(const std::string& name) const { return cards_.count(name) > 0; }
    std::size_t size() const { return cards_.size(); }
    bool empty() const { return cards_.empty(); }

    std::vector<const ToolCard*> cards() const
    {
        std::vector<const ToolCard*> out;
        out.reserve(cards_.size());
        for (const auto& [_, c] : cards_) {
            out.push_back(&c);
        }
        return out;
    }

    friend ToolRegistry register_tool(ToolRegistry registry, ToolCard card);

private:
    std::map<std::string, ToolCard> cards_;
};

/// Returns `registry` extended with `card`. Throws DuplicateName or InvalidCard.
inline ToolRegistry register_tool(ToolRegistry registry, ToolCard card)
{
    if (registry.contains(card.name)) {
        throw DuplicateName(card.name);
    }
    auto violations = validate_card(card);
    if (!violations.empty()) {
        std::string msg = "invalid card '" + card.name + "':";
        for (const auto& v : violations) {
            msg += " " + v + ";";
        }
        throw InvalidCard(msg);
    }
    auto name = card.name;
    registry.cards_.emplace(std::move(name), std::move(card));
    return registry;
}

inline ToolRegistry make_registry(const std::vector<ToolCard>& cards)
{
    ToolRegistry reg;
    for (const auto& c : cards) {
        reg = register_tool(std::move(reg), c);
    }
    return reg;
}

} // namespace tooltree
