#pragma once

#include <tooltree/errors.hpp>
#include <tooltree/evaluation/evaluator.hpp>
#include <tooltree/evaluation/prompts.hpp>
#include <tooltree/evaluation/verdict.hpp>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <mutex>
#include <random>
#include <string>
#include <thread>

namespace tooltree {

struct HttpJudgeConfig {
    std::string base_url = "http://127.0.0.1:8080"; ///< scheme://host:port
    std::string path = "/judge";
    std::string auth_header;                       ///< header name, empty for none
    std::string auth_value;
    std::chrono::milliseconds timeout{30000};
    int retries = 2;
    std::chrono::milliseconds backoff{200}; ///< base delay, doubled per attempt, jittered
    std::uint64_t seed = 0;
};

/// Judge served over HTTP. Each call POSTs {"system", "user", "temperature": 0} and
/// parses the verdict out of the response body.
class HttpJudge final : public Evaluator {
public:
    explicit HttpJudge(HttpJudgeConfig config) : config_(std::move(config)), rng_(config_.seed) {}

    double score_pre(const PreRequest& request) override { return ask(render_pre_prompt(request)).score; }
    double score_post(const PostRequest& request) override { return ask(render_post_prompt(request)).score; }

    /// One round trip with retries. Transport failures and non-2xx statuses are
    /// retried; a malformed verdict is not.
    JudgeVerdict ask(const JudgePrompt& prompt)
    {
        const std::string body = nlohmann::json{{"system", prompt.system}, {"user", prompt.user}, {"temperature", 0}}.dump();
        std::string last_error;
        for (int attempt = 0; attempt <= config_.retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(backoff(attempt));
            }
            httplib::Client client(config_.base_url);
            auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
            auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
            client.set_connection_timeout(secs.count(), usecs.count());
            client.set_read_timeout(secs.count(), usecs.count());
            httplib::Headers headers;
            if (!config_.auth_header.empty()) {
                headers.emplace(config_.auth_header, config_.auth_value);
            }
            auto res = client.Post(config_.path, headers, body, "application/json");
            if (!res) {
                last_error = httplib::to_string(res.error());
                continue;
            }
            if (res->status < 200 || res->status >= 300) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            return parse_verdict(res->body);
        }
        throw EvaluatorUnavailable("judge at " + config_.base_url + config_.path + " unavailable after " +
                                   std::to_string(config_.retries + 1) + " attempts: " + last_error);
    }

private:
    std::chrono::milliseconds backoff(int attempt)
    {
        std::lock_guard lock(mutex_);
        double jitter = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
        auto base = static_cast<double>(config_.backoff.count()) * static_cast<double>(1 << (attempt - 1));
        return std::chrono::milliseconds(static_cast<long long>(base * (1.0 + jitter)));
    }

    HttpJudgeConfig config_;
    std::mt19937_64 rng_;
    std::mutex mutex_;
};

} // namespace tooltree
