#pragma once

#include "collsum/chunker.hpp"
#include "collsum/completion.hpp"
#include "collsum/error.hpp"
#include "collsum/parallel.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <vector>

namespace collsum {

enum class SummaryLevel { chunk, topic, collection };

inline std::string to_string(SummaryLevel l) {
    switch (l) {
    case SummaryLevel::chunk: return "chunk";
    case SummaryLevel::topic: return "topic";
    case SummaryLevel::collection: return "collection";
    }
    return "?";
}

inline SummaryLevel parse_summary_level(std::string_view s) {
    if (s == "chunk") return SummaryLevel::chunk;
    if (s == "topic") return SummaryLevel::topic;
    if (s == "collection") return SummaryLevel::collection;
    throw Error("unknown summary level '" + std::string(s) + "'");
}

struct SummaryNode {
    std::string id;
    SummaryLevel level = SummaryLevel::chunk;
    int cluster_id = 0;
    std::vector<std::string> source_ids;
    std::string text;
    CompletionParams params_used;
    std::string backend_id;
    std::size_t span_start = 0; ///< Chunk nodes: sentence span summarized.
    std::size_t span_end = 0;
    std::size_t fold_depth = 0; ///< Topic and collection nodes: pairwise folding levels used.
};

inline constexpr std::string_view kPromptSuffix = "\n\nTl;dr:";
inline constexpr std::string_view kSummarySeparator = "\n\n";

inline std::string make_prompt(std::string_view text) { return std::string(text) + std::string(kPromptSuffix); }

inline std::string chunk_node_id(int cluster_id, std::size_t chunk_index) {
    return "c" + std::to_string(cluster_id) + ".k" + std::to_string(chunk_index);
}

inline std::string topic_node_id(int cluster_id) { return "c" + std::to_string(cluster_id); }

/// Summaries of one chunk. Normally a single node; when its prompt overflows
/// the backend context the chunk is cut at its split point and each part is
/// summarized (recursively), giving ids "<chunk id>.p0", "<chunk id>.p1", ...
inline std::vector<SummaryNode> summarize_chunk(const CompletionBackend& backend, const SemanticChunk& chunk,
                                                const std::vector<Sentence>& sentences,
                                                const std::vector<double>& split_scores, const CompletionParams& params) {
    if (normalize_whitespace(chunk.text).empty()) throw Error("cannot summarize an empty chunk");
    const std::string id = chunk_node_id(chunk.cluster_id, chunk.chunk_index);
    std::vector<SummaryNode> out;

    // Work list of spans still to summarize, processed in sentence order.
    std::vector<SemanticChunk> pending{chunk};
    while (!pending.empty()) {
        SemanticChunk part = pending.front();
        pending.erase(pending.begin());
        try {
            SummaryNode node;
            node.level = SummaryLevel::chunk;
            node.cluster_id = chunk.cluster_id;
            node.source_ids = {id};
            node.text = backend.complete(make_prompt(part.text), params);
            node.params_used = params;
            node.backend_id = backend.id();
            node.span_start = part.start;
            node.span_end = part.end;
            out.push_back(std::move(node));
        } catch (const ContextOverflowError&) {
            if (part.sentence_count() < 3 || sentences.empty()) throw;
            const std::size_t sp = split_point(split_scores, part.start, part.end);
            pending.insert(pending.begin(), {make_chunk(chunk.cluster_id, sentences, part.start, sp),
                                             make_chunk(chunk.cluster_id, sentences, sp + 1, part.end)});
        }
    }
    if (out.size() == 1) {
        out[0].id = id;
    } else {
        for (std::size_t i = 0; i < out.size(); ++i) out[i].id = id + ".p" + std::to_string(i);
    }
    return out;
}

namespace detail {

inline std::string join_summaries(const std::vector<std::string>& texts, std::size_t begin, std::size_t end) {
    std::string out;
    for (std::size_t i = begin; i < end; ++i) {
        if (i > begin) out += kSummarySeparator;
        out += texts[i];
    }
    return out;
}

// Summarizes texts[begin, end) as one prompt; on overflow summarizes each half
// and then the two results. `depth` receives the folding depth used.
inline std::string fold_summaries(const CompletionBackend& backend, const std::vector<std::string>& texts, std::size_t begin,
                                  std::size_t end, const CompletionParams& params, std::size_t& depth) {
    try {
        depth = 0;
        return backend.complete(make_prompt(join_summaries(texts, begin, end)), params);
    } catch (const ContextOverflowError&) {
        if (end - begin < 2) throw;
    }
    const std::size_t mid = begin + (end - begin + 1) / 2;
    std::size_t dl = 0, dr = 0, dt = 0;
    const std::vector<std::string> halves{fold_summaries(backend, texts, begin, mid, params, dl),
                                          fold_summaries(backend, texts, mid, end, params, dr)};
    std::string out = fold_summaries(backend, halves, 0, 2, params, dt);
    depth = 1 + std::max({dl, dr, dt});
    return out;
}

inline SummaryNode combine(const CompletionBackend& backend, const std::vector<SummaryNode>& inputs,
                           const CompletionParams& params, SummaryLevel level, std::string id, int cluster_id) {
    if (inputs.empty()) throw Error("nothing to summarize at " + to_string(level) + " level");
    std::vector<std::string> texts;
    SummaryNode node;
    for (const auto& n : inputs) {
        texts.push_back(n.text);
        node.source_ids.push_back(n.id);
    }
    node.id = std::move(id);
    node.level = level;
    node.cluster_id = cluster_id;
    node.text = fold_summaries(backend, texts, 0, texts.size(), params, node.fold_depth);
    node.params_used = params;
    node.backend_id = backend.id();
    return node;
}

} // namespace detail

/// Chunk summaries in chunk order, blank-line separated, sent as one prompt.
inline SummaryNode summarize_topic(const CompletionBackend& backend, int cluster_id, const std::vector<SummaryNode>& chunk_nodes,
                                   const CompletionParams& params) {
    return detail::combine(backend, chunk_nodes, params, SummaryLevel::topic, topic_node_id(cluster_id), cluster_id);
}

inline SummaryNode summarize_collection(const CompletionBackend& backend, const std::vector<SummaryNode>& topic_nodes,
                                        const CompletionParams& params) {
    return detail::combine(backend, topic_nodes, params, SummaryLevel::collection, "collection", -1);
}

struct TopicInput {
    int cluster_id = 0;
    const std::vector<Sentence>* sentences = nullptr;
    const ChunkResult* chunks = nullptr;
    const std::vector<double>* split_scores = nullptr;
};

struct SummaryTree {
    std::map<int, std::vector<SummaryNode>> chunk_nodes;
    std::map<int, SummaryNode> topic_nodes;
    SummaryNode collection;
};

/// Chunk summaries run concurrently (at most `max_in_flight` requests), then
/// topic summaries, then the collection summary. Output order follows input
/// order regardless of scheduling. Topics without chunks get no topic node.
inline SummaryTree summarize_all(const CompletionBackend& backend, const std::vector<TopicInput>& topics,
                                 const CompletionParams& params, std::size_t max_in_flight = 4) {
    struct Job {
        std::size_t topic;
        const SemanticChunk* chunk;
    };
    std::vector<Job> jobs;
    for (std::size_t t = 0; t < topics.size(); ++t)
        for (const auto& c : topics[t].chunks->chunks) jobs.push_back({t, &c});
    std::vector<std::vector<SummaryNode>> results(jobs.size());
    parallel_for(jobs.size(), max_in_flight, [&](std::size_t i) {
        const auto& topic = topics[jobs[i].topic];
        results[i] = summarize_chunk(backend, *jobs[i].chunk, *topic.sentences, *topic.split_scores, params);
    });

    SummaryTree tree;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        auto& dst = tree.chunk_nodes[topics[jobs[i].topic].cluster_id];
        dst.insert(dst.end(), results[i].begin(), results[i].end());
    }
    std::vector<int> with_chunks;
    for (const auto& t : topics)
        if (tree.chunk_nodes.count(t.cluster_id)) with_chunks.push_back(t.cluster_id);
    std::vector<SummaryNode> topic_nodes(with_chunks.size());
    parallel_for(with_chunks.size(), max_in_flight, [&](std::size_t i) {
        topic_nodes[i] = summarize_topic(backend, with_chunks[i], tree.chunk_nodes.at(with_chunks[i]), params);
    });
    for (auto& n : topic_nodes) tree.topic_nodes.emplace(n.cluster_id, n);
    tree.collection = summarize_collection(backend, topic_nodes, params);
    return tree;
}

inline nlohmann::json to_json(const SummaryNode& n) {
    nlohmann::json j{{"id", n.id},
                     {"level", to_string(n.level)},
                     {"cluster_id", n.cluster_id},
                     {"source_ids", n.source_ids},
                     {"text", n.text},
                     {"params", to_json(n.params_used)},
                     {"backend_id", n.backend_id}};
    if (n.level == SummaryLevel::chunk) j["span"] = {n.span_start, n.span_end};
    else j["fold_depth"] = n.fold_depth;
    return j;
}

inline SummaryNode summary_node_from_json(const nlohmann::json& j) {
    SummaryNode n;
    n.id = j.at("id").get<std::string>();
    n.level = parse_summary_level(j.at("level").get<std::string>());
    n.cluster_id = j.at("cluster_id").get<int>();
    n.source_ids = j.at("source_ids").get<std::vector<std::string>>();
    n.text = j.at("text").get<std::string>();
    n.params_used = completion_params_from_json(j.at("params"));
    n.backend_id = j.at("backend_id").get<std::string>();
    if (j.contains("span")) {
        n.span_start = j["span"].at(0).get<std::size_t>();
        n.span_end = j["span"].at(1).get<std::size_t>();
    }
    n.fold_depth = j.value("fold_depth", std::size_t{0});
    return n;
}

inline nlohmann::json to_json(const SummaryTree& t) {
    nlohmann::json topics = nlohmann::json::array();
    for (const auto& [cluster, node] : t.topic_nodes) {
        nlohmann::json chunks = nlohmann::json::array();
        if (t.chunk_nodes.count(cluster))
            for (const auto& c : t.chunk_nodes.at(cluster)) chunks.push_back(to_json(c));
        topics.push_back({{"summary", to_json(node)}, {"chunks", chunks}});
    }
    return {{"collection", to_json(t.collection)}, {"topics", topics}};
}

inline SummaryTree summary_tree_from_json(const nlohmann::json& j) {
    SummaryTree t;
    t.collection = summary_node_from_json(j.at("collection"));
    for (const auto& topic : j.at("topics")) {
        auto node = summary_node_from_json(topic.at("summary"));
        for (const auto& c : topic.at("chunks")) t.chunk_nodes[node.cluster_id].push_back(summary_node_from_json(c));
        t.topic_nodes.emplace(node.cluster_id, std::move(node));
    }
    return t;
}

} // namespace collsum
