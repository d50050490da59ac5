#pragma once

#include <tooltree/evaluation/evaluator.hpp>

#include <map>
#include <set>
#include <string>
#include <vector>

namespace tooltree {

/// Score tiers of the scripted judge. They straddle the default pruning
/// thresholds (0.3 before execution, 0.4 after) so every pruning path is reachable.
struct OracleTiers {
    double on_plan = 0.9;     ///< the next admissible gold step / a successful gold step
    double redundant = 0.5;   ///< a gold step already completed
    double wrong_order = 0.4; ///< a gold tool whose dependencies are not yet satisfied
    double distractor = 0.1;  ///< an off-plan tool
    double error = 0.0;       ///< any output carrying an error token
    double trap_pre = 0.1;    ///< prior given to lexical-trap distractors
    double trap_post = 0.1;   ///< reward given to executed trap distractors
    double progress = 0.1;    ///< post-score shading: the first gold step gets on_plan - progress, the last on_plan
};

/// Gold steps as a dependency DAG over tool names.
struct PlanGraph {
    struct Step {
        std::string tool;
        std::vector<std::size_t> deps; ///< indices into `steps`
    };
    std::vector<Step> steps;
    std::set<std::string> traps;

    const Step* find(const std::string& tool) const
    {
        for (const auto& s : steps) {
            if (s.tool == tool) {
                return &s;
            }
        }
        return nullptr;
    }

    /// Gold tools that completed without an error token in `ctx`.
    std::set<std::string> completed(const Context& ctx) const
    {
        std::set<std::string> done;
        for (const auto& h : ctx.history) {
            if (h.output.ok() && find(h.tool)) {
                done.insert(h.tool);
            }
        }
        return done;
    }

    bool ready(const Step& step, const std::set<std::string>& done) const
    {
        for (auto d : step.deps) {
            if (!done.count(steps[d].tool)) {
                return false;
            }
        }
        return true;
    }
};

/// Deterministic judge keyed on plan membership and dependency order, never on
/// tool descriptions. Pre-scores judge the tool choice only, like a judge that
/// reads the card but does not simulate the call.
class OracleJudge final : public Evaluator {
public:
    explicit OracleJudge(PlanGraph plan, OracleTiers tiers = {}) : plan_(std::move(plan)), tiers_(tiers) {}

    double score_pre(const PreRequest& request) override
    {
        const auto& tool = request.card.name;
        const auto* step = plan_.find(tool);
        if (!step) {
            return plan_.traps.count(tool) ? tiers_.trap_pre : tiers_.distractor;
        }
        auto done = plan_.completed(request.context);
        if (done.count(tool)) {
            return tiers_.redundant;
        }
        return plan_.ready(*step, done) ? tiers_.on_plan : tiers_.wrong_order;
    }

    double score_post(const PostRequest& request) override
    {
        if (!request.output.ok()) {
            return tiers_.error;
        }
        const auto& tool = request.card.name;
        const auto* step = plan_.find(tool);
        if (!step) {
            return plan_.traps.count(tool) ? tiers_.trap_post : tiers_.distractor;
        }
        auto done = plan_.completed(request.context_before);
        if (done.count(tool)) {
            return tiers_.redundant;
        }
        if (!plan_.ready(*step, done)) {
            return tiers_.wrong_order;
        }
        auto n = plan_.steps.size();
        if (n < 2) {
            return tiers_.on_plan;
        }
        auto remaining = static_cast<double>(n - 1 - done.size());
        return tiers_.on_plan - tiers_.progress * remaining / static_cast<double>(n - 1);
    }

    const PlanGraph& plan() const { return plan_; }
    const OracleTiers& tiers() const { return tiers_; }

private:
    PlanGraph plan_;
    OracleTiers tiers_;
};

} // namespace tooltree
