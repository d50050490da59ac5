#pragma once

#include <tooltree/context.hpp>
#include <tooltree/tool_card.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace tooltree {

/// Inputs to a pre-execution judgment: where we are, which tool, what arguments.
struct PreRequest {
    const Context& context;
    const ToolCard& card;
    const ArgumentDraft& draft;
};

/// Inputs to a post-execution judgment: the context before the call, the call, its output.
struct PostRequest {
    const Context& context_before;
    const ToolCard& card;
    const ArgumentDraft& draft;
    const ToolOutput& output;
};

/// Scores tool calls in [0,1] before (prior) and after (grounded reward) execution.
/// Implementations must be stateless or internally synchronized.
class Evaluator {
public:
    virtual ~Evaluator() = default;
    virtual double score_pre(const PreRequest& request) = 0;
    virtual double score_post(const PostRequest& request) = 0;
};

inline double clamp_unit(double v)
{
    if (std::isnan(v)) {
        return 0.0;
    }
    return std::clamp(v, 0.0, 1.0);
}

inline double score_pre(const PreRequest& request, Evaluator& evaluator)
{
    return clamp_unit(evaluator.score_pre(request));
}

inline double score_post(const PostRequest& request, Evaluator& evaluator)
{
    return clamp_unit(evaluator.score_post(request));
}

} // namespace tooltree
