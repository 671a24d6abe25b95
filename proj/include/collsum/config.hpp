#pragma once

#include "collsum/chunker.hpp"
#include "collsum/cluster.hpp"
#include "collsum/completion.hpp"
#include "collsum/corpus.hpp"
#include "collsum/embed.hpp"
#include "collsum/error.hpp"
#include "collsum/hdbscan.hpp"
#include "collsum/lda.hpp"
#include "collsum/projection.hpp"
#include "collsum/sentiment.hpp"

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>

namespace collsum {

/// Raised for invalid configuration; `key()` names the offending setting.
class ConfigError : public Error {
public:
    ConfigError(const std::string& key, const std::string& what) : Error("config " + key + ": " + what), key_(key) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

struct QueryConfig {
    std::string text;
    std::size_t u = 100;
};

struct PipelineConfig {
    std::filesystem::path corpus_path;
    CorpusFormat corpus_format = CorpusFormat::jsonl;
    std::optional<QueryConfig> query;
    std::size_t embed_max_tokens = 512;
    EmbeddingBackendSpec embedding;
    ProjectionOptions projection;
    HdbscanOptions clustering{.min_cluster_size = 5, .min_samples = {}, .selection = ClusterSelection::excess_of_mass, .k = 10,
                              .allow_single_cluster = true};
    NoisePolicy noise = NoisePolicy::drop;
    LdaOptions lda;
    std::size_t top_t = 10;
    std::optional<double> top_epsilon;
    std::size_t freq_threshold = 2;
    std::optional<std::filesystem::path> synonyms_path;
    ChunkerOptions chunker;
    CompletionBackendSpec completion_backend;
    CompletionParams completion;
    std::filesystem::path sentiment_lexicon;
    AggregateWeights sentiment_weights = AggregateWeights::uniform;
    bool evaluate = true; ///< Runs only when every clustered document has a ground-truth summary.
    std::size_t workers = 4;
    std::filesystem::path output_dir = "run";
};

namespace detail {

// Typed, strict access to one config section: unknown keys are rejected.
class Section {
public:
    Section(const nlohmann::json& j, std::string name) : name_(std::move(name)) {
        if (j.is_null()) return;
        if (!j.is_object()) throw ConfigError(name_, "must be a table");
        j_ = j;
    }

    template <typename T>
    T get(const std::string& key, T fallback) {
        used_.insert(key);
        if (!j_.contains(key) || j_[key].is_null()) return fallback;
        try {
            return j_[key].get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(path(key), "has the wrong type");
        }
    }

    template <typename T>
    std::optional<T> optional(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key) || j_[key].is_null()) return std::nullopt;
        try {
            return j_[key].get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(path(key), "has the wrong type");
        }
    }

    std::size_t count(const std::string& key, std::size_t fallback) {
        used_.insert(key);
        if (!j_.contains(key) || j_[key].is_null()) return fallback;
        if (!j_[key].is_number_integer() || j_[key].get<long long>() < 0)
            throw ConfigError(path(key), "must be a non-negative integer");
        return j_[key].get<std::size_t>();
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (k == "api_key" || k == "key" || k == "token" || k == "secret")
                throw ConfigError(path(k), "secrets are not accepted in config files; set api_key_env to the name of an "
                                           "environment variable instead");
            if (!used_.count(k)) throw ConfigError(path(k), "unknown setting");
        }
    }

    std::string path(const std::string& key) const { return name_ + "." + key; }

private:
    nlohmann::json j_ = nlohmann::json::object();
    std::string name_;
    std::set<std::string> used_;
};

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
    if (p.empty() || p.is_absolute()) return p;
    return (base / p).lexically_normal();
}

template <typename Fn>
auto parse_enum(const std::string& key, const std::string& value, Fn fn) {
    try {
        return fn(value);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(key, e.what());
    }
}

} // namespace detail

/// Parses and validates a configuration document. Relative paths resolve
/// against `base_dir`.
inline PipelineConfig config_from_json(const nlohmann::json& root, const std::filesystem::path& base_dir) {
    if (!root.is_object()) throw ConfigError("(root)", "must be a table");
    static const std::set<std::string> sections = {"corpus", "query", "embedding", "projection", "clustering", "lda",
                                                   "term_set", "chunker", "completion", "sentiment", "evaluate",
                                                   "output", "workers"};
    for (const auto& [k, v] : root.items())
        if (!sections.count(k)) throw ConfigError(k, "unknown section");

    PipelineConfig c;
    auto section = [&root](const char* name) { return detail::Section(root.contains(name) ? root[name] : nlohmann::json(), name); };

    auto corpus = section("corpus");
    const auto corpus_path = corpus.optional<std::string>("path");
    if (!corpus_path) throw ConfigError("corpus.path", "is required");
    c.corpus_path = detail::resolve(base_dir, *corpus_path);
    c.corpus_format = detail::parse_enum("corpus.format", corpus.get<std::string>("format", "jsonl"), parse_corpus_format);
    corpus.finish();

    if (root.contains("query") && !root["query"].is_null()) {
        auto q = section("query");
        QueryConfig qc;
        qc.text = q.get<std::string>("text", "");
        if (normalize_whitespace(qc.text).empty()) throw ConfigError("query.text", "must be non-empty");
        qc.u = q.count("u", qc.u);
        if (qc.u == 0) throw ConfigError("query.u", "must be at least 1");
        c.query = qc;
        q.finish();
    }

    auto e = section("embedding");
    const auto backend = e.get<std::string>("backend", "local");
    if (backend == "local") c.embedding.kind = EmbeddingBackendKind::deterministic_local;
    else if (backend == "remote") c.embedding.kind = EmbeddingBackendKind::remote_service;
    else throw ConfigError("embedding.backend", "must be 'local' or 'remote'");
    c.embedding.seed = e.get<std::uint64_t>("seed", c.embedding.seed);
    c.embedding.dim = e.count("dim", c.embedding.dim);
    c.embedding.drop_stopwords = e.get<bool>("drop_stopwords", c.embedding.drop_stopwords);
    c.embedding.endpoint = e.get<std::string>("endpoint", "");
    c.embedding.model = e.get<std::string>("model", "");
    c.embedding.api_key_env = e.get<std::string>("api_key_env", c.embedding.api_key_env);
    c.embedding.batch_size = e.count("batch_size", c.embedding.batch_size);
    c.embedding.max_in_flight = e.count("max_in_flight", c.embedding.max_in_flight);
    c.embed_max_tokens = e.count("max_tokens", c.embed_max_tokens);
    if (c.embedding.kind == EmbeddingBackendKind::remote_service && c.embedding.endpoint.empty())
        throw ConfigError("embedding.endpoint", "is required for the remote backend");
    if (c.embedding.kind == EmbeddingBackendKind::deterministic_local && c.embedding.dim == 0)
        throw ConfigError("embedding.dim", "must be positive");
    if (c.embed_max_tokens == 0) throw ConfigError("embedding.max_tokens", "must be positive");
    e.finish();

    auto p = section("projection");
    c.projection.method = detail::parse_enum("projection.method", p.get<std::string>("method", "pca"), parse_projection_method);
    c.projection.target_dim = p.count("dim", c.projection.target_dim);
    c.projection.seed = p.get<std::uint64_t>("seed", c.projection.seed);
    c.projection.n_neighbors = p.count("n_neighbors", c.projection.n_neighbors);
    c.projection.epochs = p.count("epochs", c.projection.epochs);
    c.projection.min_dist = p.get<double>("min_dist", c.projection.min_dist);
    if (c.projection.target_dim < 1) throw ConfigError("projection.dim", "must be at least 1");
    p.finish();

    auto cl = section("clustering");
    c.clustering.min_cluster_size = cl.count("min_cluster_size", c.clustering.min_cluster_size);
    if (auto ms = cl.optional<std::size_t>("min_samples")) c.clustering.min_samples = *ms;
    c.clustering.selection = detail::parse_enum("clustering.selection", cl.get<std::string>("selection", "excess-of-mass"),
                                                parse_cluster_selection);
    c.clustering.k = cl.count("k", c.clustering.k);
    c.clustering.allow_single_cluster = cl.get<bool>("allow_single_cluster", true);
    c.noise = detail::parse_enum("clustering.noise", cl.get<std::string>("noise", "drop"), parse_noise_policy);
    if (c.clustering.min_cluster_size < 2) throw ConfigError("clustering.min_cluster_size", "must be at least 2");
    if (c.clustering.min_samples && *c.clustering.min_samples == 0) throw ConfigError("clustering.min_samples", "must be at least 1");
    if (c.clustering.selection == ClusterSelection::top_k && c.clustering.k == 0) throw ConfigError("clustering.k", "must be at least 1");
    cl.finish();

    auto l = section("lda");
    c.lda.n_topics = l.count("n_topics", c.lda.n_topics);
    c.lda.alpha = l.optional<double>("alpha");
    c.lda.beta = l.get<double>("beta", c.lda.beta);
    c.lda.iterations = l.count("iterations", c.lda.iterations);
    c.lda.seed = l.get<std::uint64_t>("seed", c.lda.seed);
    if (c.lda.n_topics == 0) throw ConfigError("lda.n_topics", "must be at least 1");
    if (c.lda.beta <= 0) throw ConfigError("lda.beta", "must be positive");
    if (c.lda.alpha && *c.lda.alpha <= 0) throw ConfigError("lda.alpha", "must be positive");
    l.finish();

    auto t = section("term_set");
    c.top_t = t.count("t", c.top_t);
    c.top_epsilon = t.optional<double>("epsilon");
    c.freq_threshold = t.count("freq_threshold", c.freq_threshold);
    if (auto s = t.optional<std::string>("synonyms")) c.synonyms_path = detail::resolve(base_dir, *s);
    if (c.top_t == 0) throw ConfigError("term_set.t", "must be at least 1");
    if (c.freq_threshold == 0) throw ConfigError("term_set.freq_threshold", "must be at least 1");
    t.finish();

    auto ch = section("chunker");
    c.chunker.token_limit = ch.count("token_limit", c.chunker.token_limit);
    c.chunker.invert_activation = ch.get<bool>("invert_activation", false);
    c.chunker.plateau_minima = ch.get<bool>("plateau_minima", false);
    const auto split_on = ch.get<std::string>("split_on", "weighted");
    if (split_on == "weighted") c.chunker.split_on = SplitScores::weighted;
    else if (split_on == "raw") c.chunker.split_on = SplitScores::raw;
    else throw ConfigError("chunker.split_on", "must be 'weighted' or 'raw'");
    if (c.chunker.token_limit == 0) throw ConfigError("chunker.token_limit", "must be positive");
    ch.finish();

    auto co = section("completion");
    c.completion_backend.kind = co.get<std::string>("backend", "stub");
    if (c.completion_backend.kind != "stub" && c.completion_backend.kind != "remote")
        throw ConfigError("completion.backend", "must be 'stub' or 'remote'");
    c.completion_backend.endpoint = co.get<std::string>("endpoint", "");
    c.completion_backend.api_key_env = co.get<std::string>("api_key_env", c.completion_backend.api_key_env);
    c.completion_backend.context_window = co.count("context_window", c.completion_backend.context_window);
    c.completion_backend.max_in_flight = co.count("max_in_flight", c.completion_backend.max_in_flight);
    c.completion.model = co.get<std::string>("model", c.completion_backend.kind == "stub" ? "stub" : "");
    c.completion.temperature = co.get<double>("temperature", c.completion.temperature);
    c.completion.top_p = co.get<double>("top_p", c.completion.top_p);
    c.completion.frequency_penalty = co.get<double>("frequency_penalty", c.completion.frequency_penalty);
    c.completion.presence_penalty = co.get<double>("presence_penalty", c.completion.presence_penalty);
    c.completion.max_output_tokens = co.count("max_output_tokens", c.completion.max_output_tokens);
    if (c.completion_backend.kind == "remote" && c.completion_backend.endpoint.empty())
        throw ConfigError("completion.endpoint", "is required for the remote backend");
    if (c.completion_backend.kind == "remote" && c.completion.model.empty())
        throw ConfigError("completion.model", "is required for the remote backend");
    try {
        c.completion.validate();
    } catch (const Error& ex) {
        throw ConfigError("completion", ex.what());
    }
    co.finish();

    auto se = section("sentiment");
    const auto lexicon = se.optional<std::string>("lexicon");
    if (!lexicon) throw ConfigError("sentiment.lexicon", "is required");
    c.sentiment_lexicon = detail::resolve(base_dir, *lexicon);
    c.sentiment_weights = detail::parse_enum("sentiment.weights", se.get<std::string>("weights", "uniform"), parse_aggregate_weights);
    se.finish();

    auto ev = section("evaluate");
    c.evaluate = ev.get<bool>("enabled", true);
    ev.finish();

    auto out = section("output");
    c.output_dir = detail::resolve(base_dir, out.get<std::string>("dir", "run"));
    out.finish();

    if (root.contains("workers")) {
        if (!root["workers"].is_number_integer() || root["workers"].get<long long>() < 1)
            throw ConfigError("workers", "must be a positive integer");
        c.workers = root["workers"].get<std::size_t>();
    }
    return c;
}

/// Fully resolved configuration, every default filled in; loads back to an
/// identical PipelineConfig.
inline nlohmann::json to_json(const PipelineConfig& c) {
    nlohmann::json j;
    j["corpus"] = {{"path", c.corpus_path.string()}, {"format", to_string(c.corpus_format)}};
    if (c.query) j["query"] = {{"text", c.query->text}, {"u", c.query->u}};
    j["embedding"] = {{"backend", c.embedding.kind == EmbeddingBackendKind::deterministic_local ? "local" : "remote"},
                      {"seed", c.embedding.seed},
                      {"dim", c.embedding.dim},
                      {"drop_stopwords", c.embedding.drop_stopwords},
                      {"endpoint", c.embedding.endpoint},
                      {"model", c.embedding.model},
                      {"api_key_env", c.embedding.api_key_env},
                      {"batch_size", c.embedding.batch_size},
                      {"max_in_flight", c.embedding.max_in_flight},
                      {"max_tokens", c.embed_max_tokens}};
    j["projection"] = {{"method", to_string(c.projection.method)}, {"dim", c.projection.target_dim},
                       {"seed", c.projection.seed}, {"n_neighbors", c.projection.n_neighbors},
                       {"epochs", c.projection.epochs}, {"min_dist", c.projection.min_dist}};
    j["clustering"] = {{"min_cluster_size", c.clustering.min_cluster_size},
                       {"min_samples", c.clustering.min_samples.value_or(c.clustering.min_cluster_size)},
                       {"selection", to_string(c.clustering.selection)},
                       {"k", c.clustering.k},
                       {"allow_single_cluster", c.clustering.allow_single_cluster},
                       {"noise", to_string(c.noise)}};
    j["lda"] = {{"n_topics", c.lda.n_topics},
                {"alpha", c.lda.alpha.value_or(50.0 / static_cast<double>(c.lda.n_topics))},
                {"beta", c.lda.beta},
                {"iterations", c.lda.iterations},
                {"seed", c.lda.seed}};
    j["term_set"] = {{"t", c.top_t}, {"freq_threshold", c.freq_threshold}};
    if (c.top_epsilon) j["term_set"]["epsilon"] = *c.top_epsilon;
    if (c.synonyms_path) j["term_set"]["synonyms"] = c.synonyms_path->string();
    j["chunker"] = {{"token_limit", c.chunker.token_limit},
                    {"invert_activation", c.chunker.invert_activation},
                    {"plateau_minima", c.chunker.plateau_minima},
                    {"split_on", c.chunker.split_on == SplitScores::weighted ? "weighted" : "raw"}};
    j["completion"] = {{"backend", c.completion_backend.kind},
                       {"endpoint", c.completion_backend.endpoint},
                       {"api_key_env", c.completion_backend.api_key_env},
                       {"context_window", c.completion_backend.context_window},
                       {"max_in_flight", c.completion_backend.max_in_flight},
                       {"model", c.completion.model},
                       {"temperature", c.completion.temperature},
                       {"top_p", c.completion.top_p},
                       {"frequency_penalty", c.completion.frequency_penalty},
                       {"presence_penalty", c.completion.presence_penalty},
                       {"max_output_tokens", c.completion.max_output_tokens}};
    j["sentiment"] = {{"lexicon", c.sentiment_lexicon.string()}, {"weights", to_string(c.sentiment_weights)}};
    j["evaluate"] = {{"enabled", c.evaluate}};
    j["output"] = {{"dir", c.output_dir.string()}};
    j["workers"] = c.workers;
    return j;
}

inline nlohmann::json toml_to_json(const std::filesystem::path& path) {
    try {
        const toml::table table = toml::parse_file(path.string());
        std::stringstream ss;
        ss << toml::json_formatter{table};
        return nlohmann::json::parse(ss.str());
    } catch (const toml::parse_error& e) {
        throw InputError("invalid TOML in " + path.string() + ": " + std::string(e.description()),
                         static_cast<std::size_t>(e.source().begin.line));
    }
}

/// Loads a `.toml` or `.json` config file (chosen by extension).
inline PipelineConfig load_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw InputError("config file not found: " + path.string());
    const auto ext = path.extension().string();
    nlohmann::json root;
    if (ext == ".toml") {
        root = toml_to_json(path);
    } else if (ext == ".json") {
        std::ifstream in(path, std::ios::binary);
        try {
            root = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw InputError("invalid JSON in " + path.string() + ": " + e.what());
        }
    } else {
        throw InputError("config file must end in .toml or .json: " + path.string());
    }
    return config_from_json(root, std::filesystem::absolute(path).parent_path());
}

} // namespace collsum
