#pragma once

#include "collsum/chunker.hpp"
#include "collsum/corpus.hpp"
#include "collsum/error.hpp"
#include "collsum/porter.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <unordered_map>
#include <vector>

namespace collsum {

struct LexiconEntry {
    double valence = 5.0; ///< 1..9
    double arousal = 5.0; ///< 1..9
};

/// Valence/arousal ratings keyed by stemmed term.
class SentimentLexicon {
public:
    /// Returns false when the stemmed term was already present (the new
    /// ratings replace the old ones).
    bool add(std::string_view term, LexiconEntry e) {
        if (e.valence < 1.0 || e.valence > 9.0 || e.arousal < 1.0 || e.arousal > 9.0)
            throw Error("lexicon ratings must lie in [1, 9]");
        return entries_.insert_or_assign(stem(to_lower(term)), e).second;
    }

    const LexiconEntry* find(std::string_view stemmed) const {
        const auto it = entries_.find(std::string(stemmed));
        return it == entries_.end() ? nullptr : &it->second;
    }

    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::unordered_map<std::string, LexiconEntry> entries_;
};

namespace detail {

inline double parse_rating(std::string_view field, const std::string& where, std::size_t line) {
    double v = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (ec != std::errc() || ptr != end) throw InputError("bad number '" + std::string(field) + "' in " + where, line);
    if (v < 1.0 || v > 9.0) throw InputError("rating " + std::string(field) + " outside [1, 9] in " + where, line);
    return v;
}

} // namespace detail

/// Reads `term<TAB>valence<TAB>arousal` lines on 1..9 scales. Blank lines and
/// '#' comments are skipped. A term repeated (after stemming) keeps the last
/// ratings; `warn` is called for each repeat (default: standard error).
inline SentimentLexicon load_lexicon(const std::filesystem::path& path,
                                     const std::function<void(const std::string&)>& warn = [](const std::string& m) {
                                         std::cerr << "warning: " << m << '\n';
                                     }) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read sentiment lexicon " + path.string());
    SentimentLexicon lex;
    std::string line;
    std::size_t line_no = 0;
    const std::string where = path.string();
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string_view> fields;
        std::string_view rest = line;
        while (true) {
            const auto tab = rest.find('\t');
            fields.push_back(rest.substr(0, tab));
            if (tab == std::string_view::npos) break;
            rest.remove_prefix(tab + 1);
        }
        if (fields.size() != 3 || fields[0].empty()) throw InputError("expected term<TAB>valence<TAB>arousal in " + where, line_no);
        const LexiconEntry e{detail::parse_rating(fields[1], where, line_no), detail::parse_rating(fields[2], where, line_no)};
        if (!lex.add(fields[0], e) && warn)
            warn("duplicate lexicon term '" + std::string(fields[0]) + "' at line " + std::to_string(line_no) +
                 " of " + where + "; keeping the last ratings");
    }
    return lex;
}

struct SentimentScore {
    double valence = 0.0; ///< [-1, 1]
    double arousal = 0.0; ///< [0, 1]
    std::size_t matched_terms = 0;
    std::size_t tokens = 0;
    double coverage = 0.0; ///< matched / tokens

    friend bool operator==(const SentimentScore&, const SentimentScore&) = default;
};

inline double normalize_valence(double v) { return (v - 5.0) / 4.0; }
inline double normalize_arousal(double a) { return (a - 1.0) / 8.0; }

/// Mean lexicon ratings over the matched stems, normalized; neutral (0, 0)
/// when nothing matches.
inline SentimentScore score_stems(const std::vector<std::string>& stems, const SentimentLexicon& lex) {
    SentimentScore s;
    s.tokens = stems.size();
    double v = 0.0, a = 0.0;
    for (const auto& t : stems) {
        if (const auto* e = lex.find(t)) {
            v += e->valence;
            a += e->arousal;
            ++s.matched_terms;
        }
    }
    if (s.matched_terms) {
        const double n = static_cast<double>(s.matched_terms);
        s.valence = normalize_valence(v / n);
        s.arousal = normalize_arousal(a / n);
        s.coverage = n / static_cast<double>(s.tokens);
    }
    return s;
}

inline SentimentScore score_sentence(const Sentence& sentence, const SentimentLexicon& lex) {
    return score_stems(sentence.stems, lex);
}

inline SentimentScore score_text(std::string_view text, const SentimentLexicon& lex) {
    std::vector<std::string> stems;
    for (const auto& t : tokenize(text)) stems.push_back(stem(t));
    return score_stems(stems, lex);
}

enum class AggregateWeights { uniform, token_weighted };

inline AggregateWeights parse_aggregate_weights(std::string_view s) {
    if (s == "uniform") return AggregateWeights::uniform;
    if (s == "token-weighted") return AggregateWeights::token_weighted;
    throw Error("unknown aggregate weighting '" + std::string(s) + "'");
}

inline std::string to_string(AggregateWeights w) { return w == AggregateWeights::uniform ? "uniform" : "token-weighted"; }

/// Weighted mean of valence and arousal; matched terms and tokens are summed.
/// Opposite valences cancel, which is expected.
inline SentimentScore aggregate(const std::vector<SentimentScore>& scores, AggregateWeights weights = AggregateWeights::uniform) {
    if (scores.empty()) throw Error("cannot aggregate zero sentiment scores");
    SentimentScore out;
    double total = 0.0, v = 0.0, a = 0.0;
    for (const auto& s : scores) {
        const double w = weights == AggregateWeights::uniform ? 1.0 : static_cast<double>(s.tokens);
        total += w;
        v += w * s.valence;
        a += w * s.arousal;
        out.matched_terms += s.matched_terms;
        out.tokens += s.tokens;
    }
    if (total > 0.0) {
        out.valence = v / total;
        out.arousal = a / total;
    }
    out.coverage = out.tokens ? static_cast<double>(out.matched_terms) / static_cast<double>(out.tokens) : 0.0;
    return out;
}

struct ChunkSentiment {
    SentimentScore score;
    std::vector<SentimentScore> sentences;
};

struct SentimentHierarchy {
    int cluster_id = 0;
    std::vector<ChunkSentiment> chunks;
    SentimentScore topic;
};

/// Sentence scores, chunk scores aggregated from their sentences, and the
/// topic score of the topic summary text.
inline SentimentHierarchy score_hierarchy(const TopicSentences& topic, const std::vector<SemanticChunk>& chunks,
                                          std::string_view topic_summary, const SentimentLexicon& lex,
                                          AggregateWeights weights = AggregateWeights::uniform) {
    SentimentHierarchy h;
    h.cluster_id = topic.cluster_id;
    std::size_t expected = 0;
    for (const auto& c : chunks) {
        if (c.start != expected || c.end < c.start || c.end >= topic.sentences.size())
            throw Error("chunks do not partition the topic sentences");
        ChunkSentiment cs;
        for (std::size_t i = c.start; i <= c.end; ++i) cs.sentences.push_back(score_sentence(topic.sentences[i], lex));
        cs.score = aggregate(cs.sentences, weights);
        h.chunks.push_back(std::move(cs));
        expected = c.end + 1;
    }
    if (expected != topic.sentences.size()) throw Error("chunks do not partition the topic sentences");
    h.topic = score_text(topic_summary, lex);
    return h;
}

inline nlohmann::json to_json(const SentimentScore& s) {
    return {{"valence", s.valence}, {"arousal", s.arousal}, {"matched_terms", s.matched_terms}, {"tokens", s.tokens},
            {"coverage", s.coverage}};
}

inline SentimentScore sentiment_score_from_json(const nlohmann::json& j) {
    SentimentScore s;
    s.valence = j.at("valence").get<double>();
    s.arousal = j.at("arousal").get<double>();
    s.matched_terms = j.at("matched_terms").get<std::size_t>();
    s.tokens = j.at("tokens").get<std::size_t>();
    s.coverage = j.at("coverage").get<double>();
    return s;
}

inline nlohmann::json to_json(const SentimentHierarchy& h) {
    nlohmann::json chunks = nlohmann::json::array();
    for (const auto& c : h.chunks) {
        nlohmann::json sentences = nlohmann::json::array();
        for (const auto& s : c.sentences) sentences.push_back(to_json(s));
        chunks.push_back({{"score", to_json(c.score)}, {"sentences", sentences}});
    }
    return {{"cluster_id", h.cluster_id}, {"topic", to_json(h.topic)}, {"chunks", chunks}};
}

inline SentimentHierarchy sentiment_hierarchy_from_json(const nlohmann::json& j) {
    SentimentHierarchy h;
    h.cluster_id = j.at("cluster_id").get<int>();
    h.topic = sentiment_score_from_json(j.at("topic"));
    for (const auto& c : j.at("chunks")) {
        ChunkSentiment cs;
        cs.score = sentiment_score_from_json(c.at("score"));
        for (const auto& s : c.at("sentences")) cs.sentences.push_back(sentiment_score_from_json(s));
        h.chunks.push_back(std::move(cs));
    }
    return h;
}

} // namespace collsum
