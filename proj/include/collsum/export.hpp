#pragma once

#include "collsum/chunker.hpp"
#include "collsum/error.hpp"
#include "collsum/sentiment.hpp"
#include "collsum/summarize.hpp"
#include "collsum/topics.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace collsum {

inline constexpr int kVizSchemaVersion = 1;

/// File name of a topic's viz document inside the export directory.
inline std::string viz_topic_file(int cluster_id) {
    return cluster_id < 0 ? "topic_noise.json" : "topic_" + std::to_string(cluster_id) + ".json";
}

/// Dashboard document for one topic. Sentence indices are positions in the
/// topic's sentence list; chunk indices follow chunk order.
inline nlohmann::json viz_topic(const TopicSentences& ts, const ChunkResult& chunks, const SentimentHierarchy& sentiment,
                                const SummaryNode* topic_summary) {
    if (chunks.chunks.size() != sentiment.chunks.size()) throw Error("sentiment does not match the chunks of topic " + std::to_string(ts.cluster_id));
    nlohmann::json out_chunks = nlohmann::json::array();
    for (std::size_t c = 0; c < chunks.chunks.size(); ++c) {
        const auto& chunk = chunks.chunks[c];
        const auto& cs = sentiment.chunks[c];
        nlohmann::json sentences = nlohmann::json::array();
        for (std::size_t i = chunk.start; i <= chunk.end; ++i) {
            const auto& score = cs.sentences.at(i - chunk.start);
            sentences.push_back({{"index", i},
                                 {"doc_id", ts.sentences.at(i).doc_id},
                                 {"text", ts.sentences[i].text},
                                 {"valence", score.valence},
                                 {"arousal", score.arousal}});
        }
        out_chunks.push_back({{"index", chunk.chunk_index},
                              {"text", chunk.text},
                              {"valence", cs.score.valence},
                              {"arousal", cs.score.arousal},
                              {"sentences", sentences}});
    }
    return {{"schema", kVizSchemaVersion},
            {"topic_id", ts.cluster_id},
            {"abstractive_summary",
             {{"text", topic_summary ? topic_summary->text : ""}, {"valence", sentiment.topic.valence}, {"arousal", sentiment.topic.arousal}}},
            {"chunks", out_chunks}};
}

namespace detail {

class VizChecker {
public:
    std::vector<std::string> errors;

    bool object(const nlohmann::json& j, const std::string& at) {
        if (j.is_object()) return true;
        errors.push_back(at + ": expected an object");
        return false;
    }

    void field(const nlohmann::json& j, const std::string& at, const char* key, const char* type) {
        if (!j.contains(key)) {
            errors.push_back(at + "." + key + ": missing");
            return;
        }
        const auto& v = j[key];
        const std::string t = type;
        const bool ok = (t == "string" && v.is_string()) || (t == "integer" && v.is_number_integer()) ||
                        (t == "number" && v.is_number()) || (t == "array" && v.is_array()) || (t == "object" && v.is_object());
        if (!ok) errors.push_back(at + "." + key + ": expected " + t);
    }

    void range(const nlohmann::json& j, const std::string& at, const char* key, double lo, double hi) {
        if (j.contains(key) && j[key].is_number()) {
            const double v = j[key].get<double>();
            if (!(v >= lo && v <= hi)) errors.push_back(at + "." + key + ": " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
    }
};

} // namespace detail

/// Checks a topic document against schema version 1. Returns the list of
/// violations; empty means valid. Extra fields are allowed.
inline std::vector<std::string> validate_viz_topic(const nlohmann::json& j) {
    detail::VizChecker c;
    if (!c.object(j, "$")) return c.errors;
    c.field(j, "$", "schema", "integer");
    if (j.contains("schema") && j["schema"].is_number_integer() && j["schema"].get<int>() != kVizSchemaVersion)
        c.errors.push_back("$.schema: unsupported version " + j["schema"].dump());
    c.field(j, "$", "topic_id", "integer");
    c.field(j, "$", "abstractive_summary", "object");
    if (j.contains("abstractive_summary") && j["abstractive_summary"].is_object()) {
        const auto& s = j["abstractive_summary"];
        c.field(s, "$.abstractive_summary", "text", "string");
        c.field(s, "$.abstractive_summary", "valence", "number");
        c.range(s, "$.abstractive_summary", "valence", -1.0, 1.0);
    }
    c.field(j, "$", "chunks", "array");
    if (!j.contains("chunks") || !j["chunks"].is_array()) return c.errors;
    std::size_t expected_sentence = 0;
    for (std::size_t k = 0; k < j["chunks"].size(); ++k) {
        const auto& ch = j["chunks"][k];
        const std::string at = "$.chunks[" + std::to_string(k) + "]";
        if (!c.object(ch, at)) continue;
        c.field(ch, at, "index", "integer");
        if (ch.contains("index") && ch["index"].is_number_integer() && ch["index"].get<long long>() != static_cast<long long>(k))
            c.errors.push_back(at + ".index: expected " + std::to_string(k));
        c.field(ch, at, "text", "string");
        c.field(ch, at, "valence", "number");
        c.range(ch, at, "valence", -1.0, 1.0);
        c.field(ch, at, "sentences", "array");
        if (!ch.contains("sentences") || !ch["sentences"].is_array()) continue;
        if (ch["sentences"].empty()) c.errors.push_back(at + ".sentences: a chunk needs at least one sentence");
        for (std::size_t s = 0; s < ch["sentences"].size(); ++s) {
            const auto& se = ch["sentences"][s];
            const std::string sat = at + ".sentences[" + std::to_string(s) + "]";
            if (!c.object(se, sat)) continue;
            c.field(se, sat, "index", "integer");
            if (se.contains("index") && se["index"].is_number_integer() &&
                se["index"].get<long long>() != static_cast<long long>(expected_sentence))
                c.errors.push_back(sat + ".index: expected " + std::to_string(expected_sentence));
            ++expected_sentence;
            c.field(se, sat, "text", "string");
            c.field(se, sat, "valence", "number");
            c.range(se, sat, "valence", -1.0, 1.0);
            c.field(se, sat, "arousal", "number");
            c.range(se, sat, "arousal", 0.0, 1.0);
        }
    }
    return c.errors;
}

/// Entry document listing every exported topic file.
inline nlohmann::json viz_index(const SummaryNode& collection, const SentimentScore& collection_sentiment,
                                const std::vector<nlohmann::json>& topics) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& t : topics) {
        std::size_t n_sentences = 0;
        for (const auto& ch : t.at("chunks")) n_sentences += ch.at("sentences").size();
        const int id = t.at("topic_id").get<int>();
        list.push_back({{"topic_id", id},
                        {"file", viz_topic_file(id)},
                        {"summary", t.at("abstractive_summary").at("text")},
                        {"valence", t.at("abstractive_summary").at("valence")},
                        {"chunks", t.at("chunks").size()},
                        {"sentences", n_sentences}});
    }
    return {{"schema", kVizSchemaVersion},
            {"collection_summary",
             {{"text", collection.text}, {"valence", collection_sentiment.valence}, {"arousal", collection_sentiment.arousal}}},
            {"topics", list}};
}

inline std::vector<std::string> validate_viz_index(const nlohmann::json& j) {
    detail::VizChecker c;
    if (!c.object(j, "$")) return c.errors;
    c.field(j, "$", "schema", "integer");
    c.field(j, "$", "collection_summary", "object");
    if (j.contains("collection_summary") && j["collection_summary"].is_object()) {
        c.field(j["collection_summary"], "$.collection_summary", "text", "string");
        c.field(j["collection_summary"], "$.collection_summary", "valence", "number");
    }
    c.field(j, "$", "topics", "array");
    if (j.contains("topics") && j["topics"].is_array())
        for (std::size_t i = 0; i < j["topics"].size(); ++i) {
            const std::string at = "$.topics[" + std::to_string(i) + "]";
            if (!c.object(j["topics"][i], at)) continue;
            c.field(j["topics"][i], at, "topic_id", "integer");
            c.field(j["topics"][i], at, "file", "string");
        }
    return c.errors;
}

} // namespace collsum
