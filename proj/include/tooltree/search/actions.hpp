#pragma once

#include <tooltree/drafting.hpp>
#include <tooltree/registry.hpp>

#include <set>
#include <string>
#include <vector>

namespace tooltree {

struct CandidateAction {
    const ToolCard* card = nullptr;
    ArgumentDraft draft;
};

/// Admissible calls from `ctx` in registry (name) order, each with its drafted
/// arguments. A call identical to one already in the history (same tool, same
/// resolved inputs) is left out, as are tools named in `skip`.
inline std::vector<CandidateAction> admissible_actions(const Context& ctx, const ToolRegistry& registry,
                                                       const std::set<std::string>& skip = {})
{
    std::set<std::string> done;
    for (const auto& h : ctx.history) {
        done.insert(execution_cache_key(h.tool, h.args, ctx));
    }
    std::vector<CandidateAction> out;
    for (const ToolCard* card : registry.cards()) {
        if (skip.count(card->name) || !is_admissible(ctx, *card)) {
            continue;
        }
        auto draft = draft_arguments(ctx, *card);
        if (done.count(execution_cache_key(card->name, draft, ctx))) {
            continue;
        }
        out.push_back({card, std::move(draft)});
    }
    return out;
}

} // namespace tooltree
