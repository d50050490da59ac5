#pragma once

#include <tooltree/evaluation/evaluator.hpp>

#include <mutex>
#include <random>
#include <string_view>

namespace tooltree {

enum class FlipMode { false_positive_only, false_negative_only, both };

inline std::string_view to_string(FlipMode m)
{
    switch (m) {
    case FlipMode::false_positive_only: return "false_positive_only";
    case FlipMode::false_negative_only: return "false_negative_only";
    case FlipMode::both: return "both";
    }
    return "both";
}

struct NoiseConfig {
    double error_rate = 0.0;
    FlipMode flip_mode = FlipMode::both;
    std::uint64_t seed = 0;
};

/// Flips the accept/reject decision with probability `error_rate` when the score
/// is eligible under the flip mode. A passing score (>= threshold) becomes
/// threshold - 0.1, a failing one threshold + 0.1, clamped to [0,1].
inline double inject_judge_noise(double true_score, double threshold, const NoiseConfig& noise, double draw)
{
    const bool passing = true_score >= threshold;
    const bool eligible = noise.flip_mode == FlipMode::both ||
                          (noise.flip_mode == FlipMode::false_positive_only && !passing) ||
                          (noise.flip_mode == FlipMode::false_negative_only && passing);
    if (!eligible || !(draw < noise.error_rate)) {
        return true_score;
    }
    return passing ? clamp_unit(threshold - 0.1) : clamp_unit(threshold + 0.1);
}

struct NoiseStats {
    std::size_t decisions = 0;
    std::size_t false_positives = 0; ///< failing decisions turned into passes
    std::size_t false_negatives = 0; ///< passing decisions turned into rejections

    double error_rate() const
    {
        return decisions == 0 ? 0.0 : static_cast<double>(false_positives + false_negatives) / decisions;
    }
};

/// Wraps another evaluator and corrupts its decisions per NoiseConfig. Pre scores
/// are judged against `tau_pre`, post scores against `tau_post`.
class NoisyEvaluator final : public Evaluator {
public:
    NoisyEvaluator(Evaluator& inner, NoiseConfig noise, double tau_pre, double tau_post)
        : inner_(inner), noise_(noise), tau_pre_(tau_pre), tau_post_(tau_post), rng_(noise.seed)
    {
    }

    double score_pre(const PreRequest& request) override
    {
        return corrupt(clamp_unit(inner_.score_pre(request)), tau_pre_);
    }

    double score_post(const PostRequest& request) override
    {
        return corrupt(clamp_unit(inner_.score_post(request)), tau_post_);
    }

    NoiseStats stats() const
    {
        std::lock_guard lock(mutex_);
        return stats_;
    }

private:
    double corrupt(double score, double threshold)
    {
        std::lock_guard lock(mutex_);
        // 53 random bits -> uniform double in [0,1), identical on every platform
        double draw = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        double out = inject_judge_noise(score, threshold, noise_, draw);
        ++stats_.decisions;
        if (out != score) {
            if (score >= threshold) {
                ++stats_.false_negatives;
            } else {
                ++stats_.false_positives;
            }
        }
        return out;
    }

    Evaluator& inner_;
    NoiseConfig noise_;
    double tau_pre_;
    double tau_post_;
    std::mt19937_64 rng_;
    NoiseStats stats_;
    mutable std::mutex mutex_;
};

} // namespace tooltree
