#pragma once

#include <tooltree/context.hpp>
#include <tooltree/drafting.hpp>
#include <tooltree/errors.hpp>
#include <tooltree/tool_card.hpp>

#include <cassert>
#include <map>
#include <string>

namespace tooltree {

/// Thrown by executors for an expected tool failure; `fault_class` becomes the
/// error token.
class ToolFault : public Error {
public:
    explicit ToolFault(std::string fault_class)
        : Error("tool fault: " + fault_class), fault_class_(std::move(fault_class))
    {
    }
    const std::string& fault_class() const { return fault_class_; }

private:
    std::string fault_class_;
};

/// Runs a tool. May throw; callers turn faults into error-token outputs.
class Executor {
public:
    virtual ~Executor() = default;
    virtual ToolOutput execute(const ToolCard& card, const ArgumentDraft& args, const Context& context) = 0;
};

/// Outputs keyed by canonical (tool, resolved args). Entries are write-once.
class ExecutionCache {
public:
    const ToolOutput* find(const std::string& key)
    {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            ++misses_;
            return nullptr;
        }
        ++hits_;
        return &it->second;
    }

    void put(const std::string& key, ToolOutput output)
    {
        [[maybe_unused]] auto [it, inserted] = entries_.emplace(key, std::move(output));
        assert(inserted && "cache entries are never overwritten");
    }

    std::size_t hits() const { return hits_; }
    std::size_t misses() const { return misses_; }
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::string, ToolOutput> entries_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

struct CachedCall {
    ToolOutput output;
    bool cache_hit = false;
};

/// Executes through the cache. A miss invokes `executor` exactly once and stores
/// the result, error tokens included. Executor exceptions become error tokens.
inline CachedCall call_through_cache(const ToolCard& card, const ArgumentDraft& args, const Context& context,
                                     Executor& executor, ExecutionCache& cache)
{
    auto key = execution_cache_key(card.name, args, context);
    if (const auto* hit = cache.find(key)) {
        return {*hit, true};
    }
    ToolOutput out;
    try {
        out = executor.execute(card, args, context);
        if (out.error_token) {
            out.payload.clear();
        } else if (out.payload.empty()) {
            out = ToolOutput::error("empty_output");
        }
    } catch (const ToolFault& f) {
        out = ToolOutput::error(f.fault_class());
    } catch (const std::exception&) {
        out = ToolOutput::error("executor_fault");
    } catch (...) {
        out = ToolOutput::error("unknown_fault");
    }
    cache.put(key, out);
    return {std::move(out), false};
}

} // namespace tooltree
