#pragma once

#include <tooltree/registry.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tooltree {

/// Lowercase alphanumeric terms; '_' and punctuation split words, stopwords dropped.
inline std::vector<std::string> tokenize(std::string_view text)
{
    static const std::set<std::string, std::less<>> stopwords{
        "a",  "an", "and", "are", "as",  "at",   "be",   "by",   "for",  "from", "in",   "into", "is",
        "it", "of", "on",  "or",  "the", "that", "this", "to",   "with", "how",  "what", "which"};
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty() && !stopwords.count(cur)) {
            out.push_back(cur);
        }
        cur.clear();
    };
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

inline std::string card_document(const ToolCard& card)
{
    std::string doc = card.name + " " + card.description;
    for (const auto& t : card.domain_tags) {
        doc += " " + t;
    }
    return doc;
}

/// Okapi BM25 parameters (term-frequency saturation and length normalization).
struct LexicalScorer {
    double k1 = 1.2;
    double b = 0.75;
};

/// Relevance of every registry card to `query`, in registry (name) order.
inline std::vector<std::pair<const ToolCard*, double>> lexical_scores(std::string_view query,
                                                                       const ToolRegistry& registry,
                                                                       LexicalScorer scorer = {})
{
    auto cards = registry.cards();
    std::vector<std::map<std::string, int>> tf(cards.size());
    std::vector<double> lengths(cards.size());
    std::map<std::string, int> df;
    double total_len = 0;
    for (std::size_t i = 0; i < cards.size(); ++i) {
        auto terms = tokenize(card_document(*cards[i]));
        for (const auto& t : terms) {
            ++tf[i][t];
        }
        for (const auto& [t, _] : tf[i]) {
            ++df[t];
        }
        lengths[i] = static_cast<double>(terms.size());
        total_len += lengths[i];
    }
    const double n = static_cast<double>(cards.size());
    const double avg_len = cards.empty() ? 1.0 : std::max(1.0, total_len / n);

    std::set<std::string> query_terms;
    for (auto& t : tokenize(query)) {
        query_terms.insert(std::move(t));
    }

    std::vector<std::pair<const ToolCard*, double>> out;
    for (std::size_t i = 0; i < cards.size(); ++i) {
        double score = 0;
        for (const auto& t : query_terms) {
            auto it = tf[i].find(t);
            if (it == tf[i].end()) {
                continue;
            }
            double d = df[t];
            double idf = std::log(1.0 + (n - d + 0.5) / (d + 0.5));
            double f = it->second;
            score += idf * f * (scorer.k1 + 1) / (f + scorer.k1 * (1 - scorer.b + scorer.b * lengths[i] / avg_len));
        }
        out.emplace_back(cards[i], score);
    }
    return out;
}

/// Top-`k` cards by lexical relevance; ties go to the lexicographically smaller name.
inline std::vector<ToolCard> retrieve_shortlist(std::string_view query, const ToolRegistry& registry, std::size_t k)
{
    auto scored = lexical_scores(query, registry);
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first->name < b.first->name;
    });
    std::vector<ToolCard> out;
    for (std::size_t i = 0; i < scored.size() && i < k; ++i) {
        out.push_back(*scored[i].first);
    }
    return out;
}

} // namespace tooltree
