#pragma once
/// @file text.hpp
/// @brief Text normalization shared by the summary engine and the analysis
///        metrics, so line equality, keyword comparison and n-gram counting
///        all agree on what a "word" is.
///
/// The rule: lowercase, ASCII punctuation becomes a space, whitespace runs
/// collapse to single spaces, ends trimmed.  Tokens are the space-separated
/// pieces of the normalized text.

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "advisor/common.hpp"

namespace advisor {

inline bool is_ascii_punct(char c) {
    return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
           (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

inline std::string normalize_phrase(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if (is_space(c) || is_ascii_punct(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += c;
    }
    return out;
}

/// Normalized word tokens, in order.  "Self-Harm!" -> {"self", "harm"}.
inline std::vector<std::string> tokenize_words(std::string_view s) {
    std::vector<std::string> tokens;
    std::string norm = normalize_phrase(s);
    size_t pos = 0;
    while (pos < norm.size()) {
        size_t sp = norm.find(' ', pos);
        if (sp == std::string::npos) sp = norm.size();
        if (sp > pos) tokens.emplace_back(norm.substr(pos, sp - pos));
        pos = sp + 1;
    }
    return tokens;
}

inline size_t word_count(std::string_view s) {
    return tokenize_words(s).size();
}

/// First n normalized words, space-joined.
inline std::string truncate_words(std::string_view s, size_t n) {
    std::vector<std::string> tokens = tokenize_words(s);
    if (tokens.size() > n) tokens.resize(n);
    return join(tokens, " ");
}

// English function words dropped before keyword comparison.  Kept small and
// fixed; the copy in resources/stopwords.txt must stay in sync (tested).
inline const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> kStopwords = {
        "a",     "an",     "the",     "of",    "to",      "in",    "on",
        "for",   "with",   "and",     "or",    "not",     "no",    "nor",
        "is",    "are",    "was",     "were",  "be",      "been",  "being",
        "as",    "at",     "by",      "from",  "about",   "into",  "onto",
        "over",  "under",  "without", "within", "against", "between",
        "during", "before", "after",  "above", "below",   "up",    "down",
        "out",   "off",    "than",    "then",  "this",    "that",  "these",
        "those", "it",     "its",     "their", "theirs",  "his",   "her",
        "hers",  "your",   "yours",   "my",    "mine",    "our",   "ours",
        "they",  "them",   "he",      "she",   "you",     "we",    "i",
        "me",    "us",     "him",     "do",    "does",    "did",   "done",
        "can",   "could",  "will",    "would", "shall",   "should", "may",
        "might", "must",   "have",    "has",   "had",     "having", "how",
        "what",  "when",   "where",   "which", "who",     "whom",  "why",
        "someone", "something", "anyone", "anything", "s", "t",
    };
    return kStopwords;
}

/// Normalized tokens minus stopwords, as a set.
inline std::unordered_set<std::string> content_words(std::string_view s) {
    std::unordered_set<std::string> words;
    for (std::string& tok : tokenize_words(s)) {
        if (!stopwords().count(tok)) words.insert(std::move(tok));
    }
    return words;
}

}  // namespace advisor
