#pragma once

#include <tooltree/context.hpp>
#include <tooltree/search/tree.hpp>

#include <functional>
#include <string>

namespace tooltree {

/// What the planner is asked to solve: a starting context and a goal check.
struct SearchTask {
    std::string id;
    Context initial;
    std::function<bool(const Context&)> goal;
};

/// Simulated per-call latencies. Traces report elapsed time on this clock so that
/// results stay reproducible bit for bit.
struct CostModel {
    double judge_call_seconds = 1.0;
    double executor_call_seconds = 0.25;

    double seconds(const SearchCounters& c) const
    {
        return static_cast<double>(c.pre_calls + c.post_calls) * judge_call_seconds
               + static_cast<double>(c.executor_calls) * executor_call_seconds;
    }
};

} // namespace tooltree
