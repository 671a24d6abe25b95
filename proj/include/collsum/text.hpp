#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace collsum {

using StopwordSet = std::unordered_set<std::string>;

namespace detail {

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Bytes >= 0x80 belong to multi-byte UTF-8 sequences and are kept as word characters.
inline bool is_word_byte(char c) {
    const auto u = static_cast<unsigned char>(c);
    return (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || u >= 0x80;
}

inline char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

} // namespace detail

/// Collapses every run of whitespace into a single space and trims both ends.
inline std::string normalize_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (detail::is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c);
    }
    return out;
}

inline std::string to_lower(std::string_view text) {
    std::string out(text);
    for (char& c : out) c = detail::ascii_lower(c);
    return out;
}

/// Number of whitespace-separated tokens. This is the token measure used for
/// chunk limits and completion context windows.
inline std::size_t count_whitespace_tokens(std::string_view text) {
    std::size_t n = 0;
    bool in_token = false;
    for (char c : text) {
        const bool space = detail::is_space(c);
        if (!space && !in_token) ++n;
        in_token = !space;
    }
    return n;
}

/// Keeps the first `max_tokens` whitespace tokens of `text`, joined by single spaces.
inline std::string truncate_whitespace_tokens(std::string_view text, std::size_t max_tokens) {
    std::string out;
    std::size_t n = 0;
    std::size_t i = 0;
    while (i < text.size() && n < max_tokens) {
        while (i < text.size() && detail::is_space(text[i])) ++i;
        if (i == text.size()) break;
        const std::size_t start = i;
        while (i < text.size() && !detail::is_space(text[i])) ++i;
        if (!out.empty()) out.push_back(' ');
        out.append(text.substr(start, i - start));
        ++n;
    }
    return out;
}

struct TokenizeOptions {
    bool lowercase = true;
    /// When set, every non-alphanumeric ASCII byte acts as a separator.
    /// When unset, tokens are whitespace-delimited and keep their punctuation.
    bool strip_punct = true;
    const StopwordSet* stopwords = nullptr;
};

inline std::vector<std::string> tokenize(std::string_view text, const TokenizeOptions& opts = {}) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (current.empty()) return;
        if (!opts.stopwords || !opts.stopwords->contains(current)) tokens.push_back(current);
        current.clear();
    };
    for (char c : text) {
        const bool separator = opts.strip_punct ? !detail::is_word_byte(c) : detail::is_space(c);
        if (separator) {
            flush();
        } else {
            current.push_back(opts.lowercase ? detail::ascii_lower(c) : c);
        }
    }
    flush();
    return tokens;
}

/// English function words, lowercase and punctuation-free so they compare
/// against `tokenize` output directly.
inline const StopwordSet& english_stopwords() {
    static const StopwordSet words = {
        "a", "about", "above", "after", "again", "against", "ain", "all", "also", "am", "an", "and",
        "any", "are", "aren", "as", "at", "be", "because", "been", "before", "being", "below",
        "between", "both", "but", "by", "can", "couldn", "d", "did", "didn", "do", "does", "doesn",
        "doing", "don", "down", "during", "each", "few", "for", "from", "further", "had", "hadn",
        "has", "hasn", "have", "haven", "having", "he", "her", "here", "hers", "herself", "him",
        "himself", "his", "how", "i", "if", "in", "into", "is", "isn", "it", "its", "itself", "just",
        "ll", "m", "ma", "me", "might", "mightn", "more", "most", "must", "mustn", "my", "myself",
        "needn", "no", "nor", "not", "now", "o", "of", "off", "on", "once", "only", "or", "other",
        "our", "ours", "ourselves", "out", "over", "own", "re", "s", "same", "shan", "she", "should",
        "shouldn", "so", "some", "such", "t", "than", "that", "the", "their", "theirs", "them",
        "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
        "under", "until", "up", "ve", "very", "was", "wasn", "we", "were", "weren", "what", "when",
        "where", "which", "while", "who", "whom", "why", "will", "with", "won", "would", "wouldn",
        "y", "you", "your", "yours", "yourself", "yourselves",
    };
    return words;
}

} // namespace collsum
