#pragma once

#include "collsum/corpus.hpp"
#include "collsum/embed.hpp"
#include "collsum/error.hpp"
#include "collsum/text.hpp"
#include "collsum/topics.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace collsum {

struct SimilarityMatrix {
    std::size_t n = 0;
    std::vector<double> entries;  ///< Row-major n x n.
    std::vector<bool> degenerate; ///< Rows whose embedding is all zeros; their similarities are 0.

    double at(std::size_t i, std::size_t k) const { return entries[i * n + k]; }
};

/// Pairwise cosine similarities. A zero vector has similarity 0 with
/// everything, itself included, and is flagged in `degenerate`.
inline SimilarityMatrix similarity_matrix(const std::vector<EmbeddingVector>& embeddings) {
    if (embeddings.empty()) throw Error("similarity matrix needs at least one embedding");
    SimilarityMatrix m;
    m.n = embeddings.size();
    m.entries.assign(m.n * m.n, 0.0);
    m.degenerate.assign(m.n, false);
    for (std::size_t i = 0; i < m.n; ++i) {
        require_finite(embeddings[i]);
        m.degenerate[i] = l2_norm(embeddings[i]) == 0.0;
    }
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t k = i; k < m.n; ++k) {
            const double s = (m.degenerate[i] || m.degenerate[k]) ? 0.0 : (i == k ? 1.0 : cosine(embeddings[i], embeddings[k]));
            m.entries[i * m.n + k] = s;
            m.entries[k * m.n + i] = s;
        }
    }
    return m;
}

/// Reverse sigmoid w(x) = 1 / (1 + e^(0.5 x)).
inline double activation_weight(double x) { return 1.0 / (1.0 + std::exp(0.5 * x)); }

/// score_i = w(m[i][i+1]) + w(m[i][i+2]), using only the first term on the
/// last row. With `invert`, w(-x) is applied instead, so that minima mark
/// low rather than high adjacent similarity.
inline std::vector<double> weighted_adjacent_scores(const SimilarityMatrix& m, bool invert = false) {
    if (m.n < 2) throw Error("adjacent scores need at least two sentences");
    auto w = [invert](double x) { return activation_weight(invert ? -x : x); };
    std::vector<double> scores(m.n - 1);
    for (std::size_t i = 0; i + 1 < m.n; ++i) {
        scores[i] = w(m.at(i, i + 1));
        if (i + 2 < m.n) scores[i] += w(m.at(i, i + 2));
    }
    return scores;
}

/// Similarity of each sentence with its successor, m[i][i+1].
inline std::vector<double> raw_adjacent_scores(const SimilarityMatrix& m) {
    if (m.n < 2) throw Error("adjacent scores need at least two sentences");
    std::vector<double> scores(m.n - 1);
    for (std::size_t i = 0; i + 1 < m.n; ++i) scores[i] = m.at(i, i + 1);
    return scores;
}

/// Indices i with scores[i-1] > scores[i] < scores[i+1]. When `plateaus` is
/// set, a flat run strictly lower than both its neighbours counts once, at
/// its first index.
inline std::vector<std::size_t> find_relative_minima(const std::vector<double>& scores, bool plateaus = false) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < scores.size(); ++i) {
        if (!(scores[i - 1] > scores[i])) continue;
        std::size_t j = i;
        if (plateaus)
            while (j + 1 < scores.size() && scores[j + 1] == scores[i]) ++j;
        if (j + 1 < scores.size() && scores[i] < scores[j + 1]) out.push_back(i);
    }
    return out;
}

struct SemanticChunk {
    int cluster_id = 0;
    std::size_t chunk_index = 0;
    std::size_t start = 0; ///< First sentence, inclusive.
    std::size_t end = 0;   ///< Last sentence, inclusive.
    std::string text;
    std::size_t token_count = 0;
    /// Over the token limit but too short (two sentences or fewer) to split.
    bool oversized = false;

    std::size_t sentence_count() const noexcept { return end - start + 1; }
};

/// The sentence `sp` in [start+1, end-1] maximising
/// |sim[sp-1] - sim[sp]| + |sim[sp] - sim[sp+1]|, where sim[s] is the score
/// between sentences s and s+1. Scores outside the chunk are treated as
/// absent and their difference term contributes 0. Ties go to the lowest sp.
inline std::size_t split_point(const std::vector<double>& adjacent, std::size_t start, std::size_t end) {
    if (end < start + 2) throw Error("a split point needs a chunk of at least three sentences");
    if (end > adjacent.size()) throw Error("adjacent scores do not cover the chunk");
    std::size_t best = start + 1;
    double best_value = -1.0;
    for (std::size_t s = start + 1; s + 1 <= end; ++s) {
        double v = std::abs(adjacent[s - 1] - adjacent[s]);
        if (s + 1 < end) v += std::abs(adjacent[s] - adjacent[s + 1]);
        if (v > best_value) {
            best_value = v;
            best = s;
        }
    }
    return best;
}

inline SemanticChunk make_chunk(int cluster_id, const std::vector<Sentence>& sentences, std::size_t start, std::size_t end) {
    SemanticChunk c;
    c.cluster_id = cluster_id;
    c.start = start;
    c.end = end;
    for (std::size_t i = start; i <= end; ++i) {
        if (i > start) c.text += ' ';
        c.text += sentences[i].text;
    }
    c.token_count = count_whitespace_tokens(c.text);
    return c;
}

/// Splits `chunk` at its split point and recurses into any part still over
/// `token_limit`. Parts that stay over the limit with two or fewer sentences
/// are returned flagged `oversized`. Chunk indices are left for the caller.
inline std::vector<SemanticChunk> split_oversized_chunk(const SemanticChunk& chunk, const std::vector<Sentence>& sentences,
                                                        const std::vector<double>& adjacent, std::size_t token_limit) {
    if (chunk.token_count <= token_limit) return {chunk};
    if (chunk.sentence_count() <= 2) {
        SemanticChunk c = chunk;
        c.oversized = true;
        return {c};
    }
    const std::size_t sp = split_point(adjacent, chunk.start, chunk.end);
    std::vector<SemanticChunk> out;
    for (const auto& part : {make_chunk(chunk.cluster_id, sentences, chunk.start, sp),
                             make_chunk(chunk.cluster_id, sentences, sp + 1, chunk.end)}) {
        auto pieces = split_oversized_chunk(part, sentences, adjacent, token_limit);
        out.insert(out.end(), pieces.begin(), pieces.end());
    }
    return out;
}

enum class SplitScores { weighted, raw };

struct ChunkerOptions {
    std::size_t token_limit = 3000;
    bool invert_activation = false;
    SplitScores split_on = SplitScores::weighted;
    bool plateau_minima = false;
};

struct ChunkResult {
    int cluster_id = 0;
    std::vector<SemanticChunk> chunks;
    std::vector<double> adjacent_scores; ///< Weighted scores used to find boundaries.
    std::vector<std::size_t> minima;
    std::vector<bool> degenerate;        ///< Sentences whose embedding was all zeros.
};

/// Chunks are the runs between relative minima of the weighted adjacent
/// scores (a minimum at i ends a chunk at sentence i), then oversized chunks
/// are split recursively.
inline ChunkResult chunk_sentences(const TopicSentences& ts, const std::vector<EmbeddingVector>& embeddings,
                                   const ChunkerOptions& opts = {}) {
    if (embeddings.size() != ts.sentences.size())
        throw Error("got " + std::to_string(embeddings.size()) + " embeddings for " + std::to_string(ts.sentences.size()) +
                    " sentences");
    ChunkResult r;
    r.cluster_id = ts.cluster_id;
    const std::size_t n = ts.sentences.size();
    if (n == 0) return r;
    const auto m = similarity_matrix(embeddings);
    r.degenerate = m.degenerate;
    std::vector<double> split_scores;
    if (n >= 2) {
        r.adjacent_scores = weighted_adjacent_scores(m, opts.invert_activation);
        r.minima = find_relative_minima(r.adjacent_scores, opts.plateau_minima);
        split_scores = opts.split_on == SplitScores::weighted ? r.adjacent_scores : raw_adjacent_scores(m);
    }
    std::size_t start = 0;
    std::vector<std::size_t> ends = r.minima;
    ends.push_back(n - 1);
    for (std::size_t end : ends) {
        auto pieces = split_oversized_chunk(make_chunk(ts.cluster_id, ts.sentences, start, end), ts.sentences, split_scores,
                                            opts.token_limit);
        r.chunks.insert(r.chunks.end(), pieces.begin(), pieces.end());
        start = end + 1;
    }
    for (std::size_t i = 0; i < r.chunks.size(); ++i) r.chunks[i].chunk_index = i;
    return r;
}

inline nlohmann::json to_json(const SemanticChunk& c) {
    return {{"cluster_id", c.cluster_id}, {"index", c.chunk_index}, {"span", {c.start, c.end}}, {"text", c.text},
            {"token_count", c.token_count}, {"oversized", c.oversized}};
}

inline SemanticChunk semantic_chunk_from_json(const nlohmann::json& j) {
    SemanticChunk c;
    c.cluster_id = j.at("cluster_id").get<int>();
    c.chunk_index = j.at("index").get<std::size_t>();
    c.start = j.at("span").at(0).get<std::size_t>();
    c.end = j.at("span").at(1).get<std::size_t>();
    c.text = j.at("text").get<std::string>();
    c.token_count = j.at("token_count").get<std::size_t>();
    c.oversized = j.at("oversized").get<bool>();
    return c;
}

inline nlohmann::json to_json(const ChunkResult& r) {
    nlohmann::json chunks = nlohmann::json::array();
    for (const auto& c : r.chunks) chunks.push_back(to_json(c));
    std::vector<std::size_t> degenerate;
    for (std::size_t i = 0; i < r.degenerate.size(); ++i)
        if (r.degenerate[i]) degenerate.push_back(i);
    return {{"cluster_id", r.cluster_id}, {"chunks", chunks}, {"adjacent_scores", r.adjacent_scores},
            {"minima", r.minima}, {"degenerate_sentences", degenerate}};
}

inline ChunkResult chunk_result_from_json(const nlohmann::json& j, std::size_t n_sentences) {
    ChunkResult r;
    r.cluster_id = j.at("cluster_id").get<int>();
    for (const auto& c : j.at("chunks")) r.chunks.push_back(semantic_chunk_from_json(c));
    r.adjacent_scores = j.at("adjacent_scores").get<std::vector<double>>();
    r.minima = j.at("minima").get<std::vector<std::size_t>>();
    r.degenerate.assign(n_sentences, false);
    for (std::size_t i : j.at("degenerate_sentences").get<std::vector<std::size_t>>())
        if (i < n_sentences) r.degenerate[i] = true;
    return r;
}

} // namespace collsum
