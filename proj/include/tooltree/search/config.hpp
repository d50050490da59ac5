#pragma once

#include <tooltree/errors.hpp>

#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>

namespace tooltree {

/// Hard ceiling on rollouts per search, whatever budget a caller asks for.
inline constexpr int kMaxRollouts = 60;

inline constexpr std::size_t kUnboundedTopK = std::numeric_limits<std::size_t>::max();

struct SearchConfig {
    double lambda = 1.4;
    int r_max = kMaxRollouts;
    double tau_pre = 0.3;
    double tau_post = 0.4;
    std::size_t top_k = 2;
    double early_stop_epsilon = 1e-3;
    int early_stop_window = 10;
    double jitter_magnitude = 1e-6;
    std::optional<double> anneal_lambda; ///< per-depth multiplicative factor in (0,1]
    int max_depth = 8;
    std::uint64_t seed = 0;
    bool use_pre_eval = true;  ///< false: every prior is 1 and no pre judge call is made
    bool use_post_eval = true; ///< false: reward is the node's goal indicator, no post-pruning

    void validate() const
    {
        auto fail = [](const std::string& what) { throw InvalidConfig(what); };
        if (!(lambda >= 0)) fail("lambda must be >= 0");
        if (r_max < 1 || r_max > kMaxRollouts) fail("r_max must be in [1, " + std::to_string(kMaxRollouts) + "]");
        if (!(tau_pre >= 0 && tau_pre <= 1)) fail("tau_pre must be in [0,1]");
        if (!(tau_post >= 0 && tau_post <= 1)) fail("tau_post must be in [0,1]");
        if (top_k < 1) fail("top_k must be >= 1");
        if (!(early_stop_epsilon > 0)) fail("early_stop_epsilon must be > 0");
        if (early_stop_window < 1) fail("early_stop_window must be >= 1");
        if (!(jitter_magnitude >= 0)) fail("jitter_magnitude must be >= 0");
        if (anneal_lambda && !(*anneal_lambda > 0 && *anneal_lambda <= 1)) fail("anneal_lambda must be in (0,1]");
        if (max_depth < 1) fail("max_depth must be >= 1");
    }
};

namespace detail {

inline std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InvalidConfig(key + ": expected a boolean, got '" + v + "'");
}

} // namespace detail

/// Applies one `key = value` override. Unknown keys are an error.
inline void apply_config_value(SearchConfig& c, const std::string& key, const std::string& value)
{
    try {
        if (key == "lambda") c.lambda = std::stod(value);
        else if (key == "r_max") c.r_max = std::stoi(value);
        else if (key == "tau_pre") c.tau_pre = std::stod(value);
        else if (key == "tau_post") c.tau_post = std::stod(value);
        else if (key == "top_k") c.top_k = (value == "inf" || value == "none") ? kUnboundedTopK : std::stoul(value);
        else if (key == "early_stop_epsilon") c.early_stop_epsilon = std::stod(value);
        else if (key == "early_stop_window") c.early_stop_window = std::stoi(value);
        else if (key == "jitter_magnitude") c.jitter_magnitude = std::stod(value);
        else if (key == "anneal_lambda") {
            if (value == "none" || value.empty()) c.anneal_lambda.reset();
            else c.anneal_lambda = std::stod(value);
        }
        else if (key == "max_depth") c.max_depth = std::stoi(value);
        else if (key == "seed") c.seed = std::stoull(value);
        else if (key == "use_pre_eval") c.use_pre_eval = detail::parse_bool(key, value);
        else if (key == "use_post_eval") c.use_post_eval = detail::parse_bool(key, value);
        else throw InvalidConfig("unknown config key: " + key);
    } catch (const std::logic_error&) {
        throw InvalidConfig(key + ": cannot parse '" + value + "'");
    }
}

/// Parses a flat `key = value` file ('#' starts a comment) on top of the defaults.
inline SearchConfig parse_search_config(std::istream& in)
{
    SearchConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = detail::trim(line);
        if (line.empty()) {
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidConfig("line " + std::to_string(lineno) + ": expected key = value");
        }
        apply_config_value(c, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    c.validate();
    return c;
}

inline SearchConfig load_search_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoFailure("cannot open config " + path);
    }
    return parse_search_config(in);
}

inline std::string to_config_text(const SearchConfig& c)
{
    std::ostringstream o;
    o.precision(17);
    o << "lambda = " << c.lambda << "\n"
      << "r_max = " << c.r_max << "\n"
      << "tau_pre = " << c.tau_pre << "\n"
      << "tau_post = " << c.tau_post << "\n"
      << "top_k = " << (c.top_k == kUnboundedTopK ? std::string("inf") : std::to_string(c.top_k)) << "\n"
      << "early_stop_epsilon = " << c.early_stop_epsilon << "\n"
      << "early_stop_window = " << c.early_stop_window << "\n"
      << "jitter_magnitude = " << c.jitter_magnitude << "\n"
      << "anneal_lambda = " << (c.anneal_lambda ? std::to_string(*c.anneal_lambda) : std::string("none")) << "\n"
      << "max_depth = " << c.max_depth << "\n"
      << "seed = " << c.seed << "\n"
      << "use_pre_eval = " << (c.use_pre_eval ? "true" : "false") << "\n"
      << "use_post_eval = " << (c.use_post_eval ? "true" : "false") << "\n";
    return o.str();
}

} // namespace tooltree
