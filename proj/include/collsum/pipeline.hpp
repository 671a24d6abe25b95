#pragma once

#include "collsum/chunker.hpp"
#include "collsum/cluster.hpp"
#include "collsum/completion.hpp"
#include "collsum/config.hpp"
#include "collsum/corpus.hpp"
#include "collsum/embed.hpp"
#include "collsum/error.hpp"
#include "collsum/export.hpp"
#include "collsum/lda.hpp"
#include "collsum/parallel.hpp"
#include "collsum/projection.hpp"
#include "collsum/rouge.hpp"
#include "collsum/sentiment.hpp"
#include "collsum/summarize.hpp"
#include "collsum/topics.hpp"
#include "collsum/vector_index.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#ifndef COLLSUM_VERSION
#define COLLSUM_VERSION "0.0.0"
#endif

namespace collsum {

enum class Stage { ingest, query, cluster, topics, chunk, summarize, sentiment, evaluate, export_viz };

inline constexpr Stage kAllStages[] = {Stage::ingest, Stage::query, Stage::cluster, Stage::topics, Stage::chunk,
                                       Stage::summarize, Stage::sentiment, Stage::evaluate, Stage::export_viz};

inline std::string to_string(Stage s) {
    switch (s) {
    case Stage::ingest: return "ingest";
    case Stage::query: return "query";
    case Stage::cluster: return "cluster";
    case Stage::topics: return "topics";
    case Stage::chunk: return "chunk";
    case Stage::summarize: return "summarize";
    case Stage::sentiment: return "sentiment";
    case Stage::evaluate: return "evaluate";
    case Stage::export_viz: return "export";
    }
    return "?";
}

inline Stage parse_stage(std::string_view s) {
    for (Stage st : kAllStages)
        if (to_string(st) == s) return st;
    throw Error("unknown stage '" + std::string(s) + "'");
}

/// The artifact whose presence marks a stage as completed.
inline std::string stage_artifact(Stage s) {
    switch (s) {
    case Stage::ingest: return "corpus.json";
    case Stage::query: return "query.json";
    case Stage::cluster: return "clusters.json";
    case Stage::topics: return "topics.json";
    case Stage::chunk: return "chunks.json";
    case Stage::summarize: return "summaries.json";
    case Stage::sentiment: return "sentiment.json";
    case Stage::evaluate: return "scores.csv";
    case Stage::export_viz: return "viz/index.json";
    }
    return "";
}

/// A stage failed; `stage()` names it and what() carries the cause.
class StageError : public Error {
public:
    StageError(Stage stage, const std::string& cause) : Error("stage '" + to_string(stage) + "' failed: " + cause), stage_(stage) {}
    Stage stage() const noexcept { return stage_; }

private:
    Stage stage_;
};

inline std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

/// Writes through a temporary file and rename, so readers never see a
/// partial file.
inline void write_atomic(const std::filesystem::path& path, std::string_view data) {
    std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp);
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        out.flush();
        if (!out) throw Error("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("missing upstream artifact " + path.filename().string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("corrupt artifact " + path.string() + ": " + e.what());
    }
}

/// Exclusive ownership of an output directory for the lifetime of the object.
class RunLock {
public:
    explicit RunLock(const std::filesystem::path& dir) : path_(dir / ".lock") {
        std::filesystem::create_directories(dir);
        const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd < 0)
            throw Error("output directory " + dir.string() + " is in use by another run (remove " + path_.string() +
                        " if that run is no longer alive)");
        const std::string pid = std::to_string(::getpid()) + "\n";
        [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
        ::close(fd);
    }
    ~RunLock() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    std::filesystem::path path_;
};

struct ArtifactFile {
    std::string path; ///< Relative to the output directory.
    std::string sha256;
    std::size_t bytes = 0;
};

struct StageRecord {
    Stage stage = Stage::ingest;
    std::string status; ///< "ran", "resumed" or "skipped"
    double seconds = 0.0;
    std::vector<ArtifactFile> files;
    std::string note;
};

struct RunManifest {
    std::string version = COLLSUM_VERSION;
    std::string status; ///< "complete" or "failed"
    std::optional<Stage> failed_stage;
    std::string error;
    nlohmann::json config;
    std::string config_sha256;
    std::string embedding_backend;
    std::string completion_backend;
    nlohmann::json settings;
    std::vector<StageRecord> stages;
};

inline nlohmann::json to_json(const RunManifest& m) {
    nlohmann::json stages = nlohmann::json::array(), artifacts = nlohmann::json::array();
    for (const auto& s : m.stages) {
        nlohmann::json rec{{"stage", to_string(s.stage)}, {"status", s.status}, {"seconds", s.seconds}};
        if (!s.note.empty()) rec["note"] = s.note;
        stages.push_back(rec);
        if (s.files.empty()) continue;
        nlohmann::json files = nlohmann::json::array();
        for (const auto& f : s.files) files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
        artifacts.push_back({{"stage", to_string(s.stage)}, {"path", stage_artifact(s.stage) == "viz/index.json" ? "viz/" : s.files.front().path},
                             {"files", files}});
    }
    nlohmann::json j{{"tool", "collsum"},
                     {"version", m.version},
                     {"status", m.status},
                     {"config", m.config},
                     {"config_sha256", m.config_sha256},
                     {"backends", {{"embedding", m.embedding_backend}, {"completion", m.completion_backend}}},
                     {"settings", m.settings},
                     {"stages", stages},
                     {"artifacts", artifacts}};
    if (m.failed_stage) {
        j["failed_stage"] = to_string(*m.failed_stage);
        j["error"] = m.error;
    }
    return j;
}

struct RunOptions {
    bool resume = false;
    std::function<void(const std::string&)> log;
    // Backend overrides; when unset the backends named in the config are built.
    std::shared_ptr<const EmbeddingBackend> embedding;
    std::shared_ptr<const CompletionBackend> completion;
};

namespace detail {

inline nlohmann::json to_json(const Document& d) {
    nlohmann::json j{{"id", d.id}, {"text", d.text}};
    if (d.title) j["title"] = *d.title;
    if (d.ground_truth_summary) j["summary"] = *d.ground_truth_summary;
    return j;
}

inline Document document_from_json(const nlohmann::json& j) {
    Document d;
    d.id = j.at("id").get<std::string>();
    d.text = j.at("text").get<std::string>();
    if (j.contains("title")) d.title = j["title"].get<std::string>();
    if (j.contains("summary")) d.ground_truth_summary = j["summary"].get<std::string>();
    return d;
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n"; }

struct Adjustment {
    std::string setting;
    std::size_t requested;
    std::size_t used;
    std::string reason;
};

} // namespace detail

/// Runs the summarization stages against one output directory. Every stage
/// reads its inputs from the artifacts of earlier stages, so any stage can be
/// re-run or resumed in isolation.
class Pipeline {
public:
    Pipeline(PipelineConfig config, RunOptions options = {}) : config_(std::move(config)), options_(std::move(options)) {
        out_ = config_.output_dir;
    }

    const std::filesystem::path& output_dir() const noexcept { return out_; }
    const PipelineConfig& config() const noexcept { return config_; }

    /// Runs one stage from its upstream artifacts and returns what it wrote.
    StageRecord run_stage(Stage s) {
        const auto t0 = std::chrono::steady_clock::now();
        StageRecord rec;
        rec.stage = s;
        rec.status = "ran";
        try {
            switch (s) {
            case Stage::ingest: rec.files = ingest(); break;
            case Stage::query: rec.files = query(); break;
            case Stage::cluster: rec.files = cluster(); break;
            case Stage::topics: rec.files = topics(); break;
            case Stage::chunk: rec.files = chunk(); break;
            case Stage::summarize: rec.files = summarize(); break;
            case Stage::sentiment: rec.files = sentiment(); break;
            case Stage::evaluate: rec.files = evaluate(rec.note); break;
            case Stage::export_viz: rec.files = export_viz(); break;
            }
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(s, e.what());
        }
        if (s == Stage::evaluate && rec.files.empty()) rec.status = "skipped";
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return rec;
    }

    /// Runs every stage in order and writes manifest.json. With `resume`,
    /// stages whose artifacts already exist are kept. On failure the manifest
    /// records the failing stage and the StageError is rethrown.
    RunManifest run() {
        RunLock lock(out_);
        RunManifest m;
        m.config = to_json(config_);
        m.config_sha256 = sha256_hex(m.config.dump());
        m.embedding_backend = embedding_backend().id();
        m.completion_backend = completion_backend().id();
        m.settings = settings();

        const auto manifest_path = out_ / "manifest.json";
        if (options_.resume && std::filesystem::exists(manifest_path)) {
            const auto previous = read_json(manifest_path);
            if (previous.value("config_sha256", "") != m.config_sha256)
                throw Error("cannot resume: the configuration differs from the one that produced " + out_.string());
        }
        if (!options_.resume) clear_artifacts();

        for (Stage s : kAllStages) {
            if (options_.resume && std::filesystem::exists(out_ / stage_artifact(s))) {
                StageRecord rec;
                rec.stage = s;
                rec.status = "resumed";
                rec.files = existing_files(s);
                m.stages.push_back(std::move(rec));
                log("resume " + to_string(s));
                continue;
            }
            log("stage " + to_string(s));
            try {
                m.stages.push_back(run_stage(s));
            } catch (const StageError& e) {
                m.status = "failed";
                m.failed_stage = e.stage();
                m.error = e.what();
                m.settings = settings();
                write_atomic(manifest_path, detail::dump(to_json(m)));
                throw;
            }
        }
        m.status = "complete";
        m.settings = settings();
        write_atomic(manifest_path, detail::dump(to_json(m)));
        return m;
    }

private:
    PipelineConfig config_;
    RunOptions options_;
    std::filesystem::path out_;
    mutable std::shared_ptr<const EmbeddingBackend> embedding_;
    mutable std::shared_ptr<const CompletionBackend> completion_;

    void log(const std::string& msg) const {
        if (options_.log) options_.log(msg);
    }

    const EmbeddingBackend& embedding_backend() const {
        if (!embedding_) embedding_ = options_.embedding ? options_.embedding : std::shared_ptr<const EmbeddingBackend>(make_embedding_backend(config_.embedding));
        return *embedding_;
    }

    const CompletionBackend& completion_backend() const {
        if (!completion_)
            completion_ = options_.completion ? options_.completion
                                              : std::shared_ptr<const CompletionBackend>(make_completion_backend(config_.completion_backend));
        return *completion_;
    }

    nlohmann::json settings() const {
        nlohmann::json s{{"embed_prefix_tokens", config_.embed_max_tokens},
                         {"prompt_suffix", std::string(kPromptSuffix)},
                         {"summary_separator", std::string(kSummarySeparator)},
                         {"invert_activation", config_.chunker.invert_activation},
                         {"split_on", config_.chunker.split_on == SplitScores::weighted ? "weighted" : "raw"},
                         {"plateau_minima", config_.chunker.plateau_minima},
                         {"noise", to_string(config_.noise)},
                         {"sentiment_weights", to_string(config_.sentiment_weights)},
                         {"adjustments", nlohmann::json::array()}};
        const auto clusters = out_ / "clusters.json";
        if (std::filesystem::exists(clusters)) {
            const auto j = read_json(clusters);
            if (j.contains("adjustments")) s["adjustments"] = j["adjustments"];
        }
        return s;
    }

    std::filesystem::path at(const std::string& rel) const { return out_ / rel; }

    ArtifactFile write(const std::string& rel, const std::string& data) const {
        write_atomic(at(rel), data);
        return {rel, sha256_hex(data), data.size()};
    }

    ArtifactFile describe(const std::string& rel) const {
        const std::string data = detail::read_file(at(rel));
        return {rel, sha256_hex(data), data.size()};
    }

    std::vector<ArtifactFile> existing_files(Stage s) const {
        if (s == Stage::evaluate) return {describe("scores.csv"), describe("scores.txt")};
        if (s != Stage::export_viz) return {describe(stage_artifact(s))};
        std::vector<ArtifactFile> files{describe("viz/index.json")};
        const auto index = read_json(at("viz/index.json"));
        for (const auto& t : index.at("topics")) files.push_back(describe("viz/" + t.at("file").get<std::string>()));
        return files;
    }

    void clear_artifacts() const {
        std::error_code ec;
        for (Stage s : kAllStages) std::filesystem::remove(at(stage_artifact(s)), ec);
        std::filesystem::remove(at("scores.txt"), ec);
        std::filesystem::remove(at("manifest.json"), ec);
        if (std::filesystem::is_directory(at("viz"))) {
            for (const auto& e : std::filesystem::directory_iterator(at("viz"))) {
                const auto name = e.path().filename().string();
                if (name.starts_with("topic_") && e.path().extension() == ".json") std::filesystem::remove(e.path(), ec);
            }
        }
    }

    Corpus load_ingested() const {
        std::vector<Document> docs;
        const auto j = read_json(at("corpus.json"));
        for (const auto& d : j.at("documents")) docs.push_back(detail::document_from_json(d));
        return Corpus(std::move(docs));
    }

    // ---- stages ----

    std::vector<ArtifactFile> ingest() const {
        const Corpus corpus = load_corpus(config_.corpus_path, config_.corpus_format);
        nlohmann::json docs = nlohmann::json::array();
        std::size_t with_summary = 0;
        for (const auto& d : corpus) {
            docs.push_back(detail::to_json(d));
            with_summary += d.ground_truth_summary.has_value();
        }
        return {write("corpus.json", detail::dump({{"source", config_.corpus_path.filename().string()},
                                                   {"format", to_string(config_.corpus_format)},
                                                   {"documents", docs},
                                                   {"documents_with_summary", with_summary}}))};
    }

    std::vector<ArtifactFile> query() const {
        const Corpus corpus = load_ingested();
        std::vector<std::string> texts;
        for (const auto& d : corpus) texts.push_back(truncate_whitespace_tokens(d.text, config_.embed_max_tokens));
        if (config_.query) texts.push_back(truncate_whitespace_tokens(config_.query->text, config_.embed_max_tokens));
        auto vectors = embedding_backend().embed(texts);
        if (vectors.size() != texts.size()) throw Error("embedding backend returned the wrong number of vectors");

        nlohmann::json ranking = nlohmann::json::array(), selected = nlohmann::json::array();
        if (config_.query) {
            std::vector<std::pair<std::string, EmbeddingVector>> entries;
            for (std::size_t i = 0; i < corpus.size(); ++i) entries.emplace_back(corpus[i].id, vectors[i]);
            const auto index = build_index(std::move(entries), Metric::cosine, IndexMode::exact);
            for (const auto& n : index.query(vectors.back(), config_.query->u)) {
                ranking.push_back({{"id", n.id}, {"score", n.score}});
                selected.push_back(n.id);
            }
        } else {
            for (const auto& d : corpus) selected.push_back(d.id);
        }
        nlohmann::json embeddings = nlohmann::json::object();
        std::vector<std::string> degenerate;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            embeddings[corpus[i].id] = vectors[i].values;
            if (vectors[i].degenerate) degenerate.push_back(corpus[i].id);
        }
        nlohmann::json j{{"query", config_.query ? nlohmann::json(config_.query->text) : nlohmann::json()},
                         {"u", config_.query ? nlohmann::json(config_.query->u) : nlohmann::json()},
                         {"embedding_backend", embedding_backend().id()},
                         {"max_tokens", config_.embed_max_tokens},
                         {"selected", selected},
                         {"ranking", ranking},
                         {"degenerate", degenerate},
                         {"embeddings", embeddings}};
        return {write("query.json", detail::dump(j))};
    }

    std::vector<ArtifactFile> cluster() const {
        const auto q = read_json(at("query.json"));
        const auto ids = q.at("selected").get<std::vector<std::string>>();
        const std::size_t n = ids.size();
        if (n < 2) throw Error("clustering needs at least 2 documents, got " + std::to_string(n));
        std::vector<EmbeddingVector> vectors;
        for (const auto& id : ids) vectors.push_back({q.at("embeddings").at(id).get<std::vector<double>>(), false});
        const std::size_t input_dim = vectors.front().dim();

        // Small collections cannot support the requested sizes; clamp and record.
        std::vector<detail::Adjustment> adjustments;
        auto clamp = [&](const char* setting, std::size_t requested, std::size_t limit, const std::string& reason) {
            if (requested <= limit) return requested;
            adjustments.push_back({setting, requested, limit, reason});
            return limit;
        };
        ProjectionOptions popts = config_.projection;
        const std::size_t dim_limit = std::max<std::size_t>(1, std::min(n - 1, input_dim - 1));
        popts.target_dim = clamp("projection.dim", popts.target_dim, dim_limit,
                                 "needs fewer dimensions than documents and input dimensions");
        popts.n_neighbors = clamp("projection.n_neighbors", popts.n_neighbors, n - 1, "more neighbors than other documents");
        HdbscanOptions hopts = config_.clustering;
        hopts.min_cluster_size = clamp("clustering.min_cluster_size", hopts.min_cluster_size, n, "larger than the document count");
        std::size_t ms = hopts.min_samples.value_or(config_.clustering.min_cluster_size);
        ms = clamp("clustering.min_samples", ms, n - 1, "needs at least min_samples + 1 documents");
        hopts.min_samples = ms;

        const auto points = project(vectors, ids, popts);
        const auto assignment = cluster_points(points, hopts);
        if (assignment.n_clusters == 0 && config_.noise == NoisePolicy::drop)
            throw Error("every document was labelled noise and noise is dropped; lower clustering.min_cluster_size, "
                        "enable clustering.allow_single_cluster or set clustering.noise = \"noise-topic\"");

        nlohmann::json pts = nlohmann::json::array(), adj = nlohmann::json::array();
        for (const auto& p : points) pts.push_back({{"id", p.doc_id}, {"coords", p.coords}});
        for (const auto& a : adjustments)
            adj.push_back({{"setting", a.setting}, {"requested", a.requested}, {"used", a.used}, {"reason", a.reason}});
        nlohmann::json j{{"assignment", to_json(assignment)},
                         {"projection", {{"method", to_string(popts.method)}, {"dim", popts.target_dim}, {"seed", popts.seed}}},
                         {"hdbscan",
                          {{"min_cluster_size", hopts.min_cluster_size},
                           {"min_samples", ms},
                           {"selection", to_string(hopts.selection)},
                           {"k", hopts.k}}},
                         {"adjustments", adj},
                         {"points", pts}};
        return {write("clusters.json", detail::dump(j))};
    }

    // Clustered documents in ingest order, grouped per the noise policy.
    std::map<int, std::vector<Document>> partitions() const {
        const Corpus corpus = load_ingested();
        const auto assignment = cluster_assignment_from_json(read_json(at("clusters.json")).at("assignment"));
        std::vector<Document> docs;
        for (const auto& d : corpus)
            if (assignment.labels.count(d.id)) docs.push_back(d);
        return partition_corpus(Corpus(std::move(docs)), assignment, config_.noise);
    }

    std::vector<ArtifactFile> topics() const {
        const auto parts = partitions();
        SynonymLexicon lexicon;
        if (config_.synonyms_path) lexicon = load_synonym_lexicon(*config_.synonyms_path);
        std::vector<int> ids;
        for (const auto& [id, docs] : parts) ids.push_back(id);
        std::vector<nlohmann::json> out(ids.size());
        parallel_for(ids.size(), config_.workers, [&](std::size_t i) {
            const int id = ids[i];
            const auto& docs = parts.at(id);
            const auto model = fit_lda(docs, config_.lda);
            const auto lists = top_terms(model, config_.top_t, config_.top_epsilon);
            const auto terms = build_topic_term_set(id, lists, config_.freq_threshold, lexicon);
            const auto sentences = extract_topic_sentences(id, docs, terms);
            nlohmann::json list_json = nlohmann::json::array();
            for (const auto& l : lists) {
                nlohmann::json one = nlohmann::json::array();
                for (const auto& tw : l) one.push_back({{"term", tw.term}, {"weight", tw.weight}});
                list_json.push_back(one);
            }
            std::vector<std::string> doc_ids;
            for (const auto& d : docs) doc_ids.push_back(d.id);
            out[i] = {{"cluster_id", id}, {"documents", doc_ids}, {"top_terms", list_json}, {"term_set", to_json(terms)},
                      {"sentences", to_json(sentences)}, {"model", to_json(model)}};
        });
        nlohmann::json topics = nlohmann::json::array();
        for (auto& t : out) {
            if (t["term_set"]["degenerate"].get<bool>())
                log("warning: topic " + std::to_string(t["cluster_id"].get<int>()) + " has no term reaching term_set.freq_threshold = " +
                    std::to_string(config_.freq_threshold) + "; it gets no sentences");
            topics.push_back(std::move(t));
        }
        return {write("topics.json", detail::dump({{"synonym_entries", lexicon.size()}, {"topics", topics}}))};
    }

    std::vector<TopicSentences> load_topic_sentences() const {
        std::vector<TopicSentences> out;
        const auto j = read_json(at("topics.json"));
        for (const auto& t : j.at("topics")) out.push_back(topic_sentences_from_json(t.at("sentences")));
        return out;
    }

    std::vector<ArtifactFile> chunk() const {
        const auto topics = load_topic_sentences();
        nlohmann::json list = nlohmann::json::array();
        for (const auto& ts : topics) {
            std::vector<std::string> texts;
            for (const auto& s : ts.sentences) texts.push_back(s.text);
            const auto embeddings = texts.empty() ? std::vector<EmbeddingVector>{} : embedding_backend().embed(texts);
            const auto result = chunk_sentences(ts, embeddings, config_.chunker);
            std::vector<double> split_scores = result.adjacent_scores;
            if (config_.chunker.split_on == SplitScores::raw && embeddings.size() >= 2)
                split_scores = raw_adjacent_scores(similarity_matrix(embeddings));
            list.push_back({{"result", to_json(result)}, {"split_scores", split_scores}});
        }
        return {write("chunks.json", detail::dump({{"topics", list}}))};
    }

    struct ChunkData {
        std::vector<TopicSentences> sentences;
        std::vector<ChunkResult> chunks;
        std::vector<std::vector<double>> split_scores;
    };

    ChunkData load_chunks() const {
        ChunkData d;
        d.sentences = load_topic_sentences();
        const auto j = read_json(at("chunks.json")).at("topics");
        if (j.size() != d.sentences.size()) throw Error("chunks.json does not match topics.json");
        for (std::size_t i = 0; i < j.size(); ++i) {
            d.chunks.push_back(chunk_result_from_json(j[i].at("result"), d.sentences[i].sentences.size()));
            d.split_scores.push_back(j[i].at("split_scores").get<std::vector<double>>());
        }
        return d;
    }

    std::vector<ArtifactFile> summarize() const {
        const auto d = load_chunks();
        std::vector<TopicInput> inputs;
        for (std::size_t i = 0; i < d.chunks.size(); ++i)
            inputs.push_back({d.chunks[i].cluster_id, &d.sentences[i].sentences, &d.chunks[i], &d.split_scores[i]});
        const auto tree = summarize_all(completion_backend(), inputs, config_.completion, config_.completion_backend.max_in_flight);
        return {write("summaries.json", detail::dump(to_json(tree)))};
    }

    std::vector<ArtifactFile> sentiment() const {
        const auto d = load_chunks();
        const auto tree = summary_tree_from_json(read_json(at("summaries.json")));
        const auto lex = load_lexicon(config_.sentiment_lexicon, [this](const std::string& m) { log("warning: " + m); });
        nlohmann::json topics = nlohmann::json::array();
        for (std::size_t i = 0; i < d.chunks.size(); ++i) {
            const auto it = tree.topic_nodes.find(d.chunks[i].cluster_id);
            const std::string summary = it == tree.topic_nodes.end() ? "" : it->second.text;
            topics.push_back(to_json(score_hierarchy(d.sentences[i], d.chunks[i].chunks, summary, lex, config_.sentiment_weights)));
        }
        nlohmann::json j{{"lexicon", config_.sentiment_lexicon.filename().string()},
                         {"lexicon_entries", lex.size()},
                         {"weights", to_string(config_.sentiment_weights)},
                         {"collection", to_json(score_text(tree.collection.text, lex))},
                         {"topics", topics}};
        return {write("sentiment.json", detail::dump(j))};
    }

    std::vector<ArtifactFile> evaluate(std::string& note) const {
        if (!config_.evaluate) {
            note = "disabled in config";
            return {};
        }
        const auto parts = partitions();
        for (const auto& [id, docs] : parts)
            for (const auto& doc : docs)
                if (!doc.ground_truth_summary) {
                    note = "skipped: document '" + doc.id + "' has no ground-truth summary";
                    return {};
                }
        const auto tree = summary_tree_from_json(read_json(at("summaries.json")));
        std::vector<std::pair<std::string, std::string>> summaries;
        std::vector<std::string> references;
        for (const auto& [id, node] : tree.topic_nodes) {
            summaries.emplace_back(id == kNoise ? "noise" : topic_node_id(id), node.text);
            references.push_back(concat_ground_truth(parts.at(id)));
        }
        const auto run = score_run(summaries, references);
        return {write("scores.csv", scores_csv(run)), write("scores.txt", scores_table(run))};
    }

    std::vector<ArtifactFile> export_viz() const {
        const auto d = load_chunks();
        const auto tree = summary_tree_from_json(read_json(at("summaries.json")));
        const auto sj = read_json(at("sentiment.json"));
        const auto& st = sj.at("topics");
        if (st.size() != d.chunks.size()) throw Error("sentiment.json does not match chunks.json");
        std::vector<nlohmann::json> docs;
        std::vector<ArtifactFile> files;
        for (std::size_t i = 0; i < d.chunks.size(); ++i) {
            const auto it = tree.topic_nodes.find(d.chunks[i].cluster_id);
            auto doc = viz_topic(d.sentences[i], d.chunks[i], sentiment_hierarchy_from_json(st[i]),
                                 it == tree.topic_nodes.end() ? nullptr : &it->second);
            const auto errors = validate_viz_topic(doc);
            if (!errors.empty()) throw Error("export for topic " + std::to_string(d.chunks[i].cluster_id) + " is invalid: " + errors.front());
            docs.push_back(std::move(doc));
        }
        const auto index = viz_index(tree.collection, sentiment_score_from_json(sj.at("collection")), docs);
        if (const auto errors = validate_viz_index(index); !errors.empty()) throw Error("export index is invalid: " + errors.front());
        // The index goes last: its presence marks the export as complete.
        for (const auto& doc : docs) files.push_back(write("viz/" + viz_topic_file(doc.at("topic_id").get<int>()), detail::dump(doc)));
        files.insert(files.begin(), write("viz/index.json", detail::dump(index)));
        return files;
    }
};

inline RunManifest run_pipeline(const PipelineConfig& config, RunOptions options = {}) {
    return Pipeline(config, std::move(options)).run();
}

} // namespace collsum
