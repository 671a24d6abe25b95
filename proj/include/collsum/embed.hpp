#pragma once

#include "collsum/error.hpp"
#include "collsum/http.hpp"
#include "collsum/parallel.hpp"
#include "collsum/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace collsum {

struct EmbeddingVector {
    std::vector<double> values;
    /// Set for vectors with no content (empty input text); values are all zero.
    bool degenerate = false;

    std::size_t dim() const noexcept { return values.size(); }
    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

inline double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) throw Error("dimension mismatch: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
    return s;
}

inline double l2_norm(const EmbeddingVector& v) {
    double s = 0.0;
    for (double x : v.values) s += x * x;
    return std::sqrt(s);
}

/// Cosine similarity clamped to [-1, 1]; 0 when either vector is all zeros.
inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    const double d = dot(a, b);
    const double n = l2_norm(a) * l2_norm(b);
    if (n == 0.0) return 0.0;
    return std::clamp(d / n, -1.0, 1.0);
}

inline void require_finite(const EmbeddingVector& v) {
    for (double x : v.values)
        if (!std::isfinite(x)) throw Error("embedding contains a non-finite value");
}

enum class EmbeddingBackendKind { remote_service, deterministic_local };

struct EmbeddingBackendSpec {
    EmbeddingBackendKind kind = EmbeddingBackendKind::deterministic_local;
    // remote-service
    std::string endpoint;
    std::string model;
    std::string api_key_env = "COLLSUM_EMBEDDING_API_KEY";
    std::size_t batch_size = 64;
    std::size_t max_in_flight = 4;
    RetryPolicy retry;
    // deterministic-local; for remote backends a nonzero dim is enforced on replies
    std::uint64_t seed = 7;
    std::size_t dim = 256;
    bool drop_stopwords = true;
};

class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    /// One vector per text, in input order.
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) const = 0;
    virtual std::string id() const = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace detail

/// Offline encoder: a hashed bag of words (2^20 buckets, raw term counts)
/// multiplied by a seeded Rademacher projection matrix, then L2-normalized.
/// Matrix rows are generated on demand from (seed, bucket), so identical
/// text and seed always give identical vectors.
class LocalEmbedder final : public EmbeddingBackend {
public:
    static constexpr std::uint64_t kBuckets = 1ULL << 20;

    LocalEmbedder(std::uint64_t seed, std::size_t dim, bool drop_stopwords = true)
        : seed_(seed), dim_(dim), drop_stopwords_(drop_stopwords) {
        if (dim_ == 0) throw Error("embedding dimension must be positive");
    }

    EmbeddingVector embed_one(std::string_view text) const {
        TokenizeOptions opts;
        if (drop_stopwords_) opts.stopwords = &english_stopwords();
        std::unordered_map<std::uint64_t, double> counts;
        for (const auto& tok : tokenize(text, opts)) counts[detail::fnv1a64(tok) % kBuckets] += 1.0;

        EmbeddingVector v{std::vector<double>(dim_, 0.0), false};
        // Summation order is fixed by sorting buckets so results are bitwise stable.
        std::vector<std::pair<std::uint64_t, double>> entries(counts.begin(), counts.end());
        std::sort(entries.begin(), entries.end());
        std::uint64_t seed_state = seed_;
        const std::uint64_t seed_mix = detail::splitmix64(seed_state);
        for (const auto& [bucket, count] : entries) {
            std::uint64_t state = bucket ^ seed_mix;
            std::uint64_t bits = 0;
            for (std::size_t j = 0; j < dim_; ++j) {
                if (j % 64 == 0) bits = detail::splitmix64(state);
                v.values[j] += ((bits >> (j % 64)) & 1ULL) ? count : -count;
            }
        }
        const double n = l2_norm(v);
        if (n == 0.0) {
            v.degenerate = true;
            return v;
        }
        for (double& x : v.values) x /= n;
        return v;
    }

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) const override {
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(embed_one(t));
        return out;
    }

    std::string id() const override {
        return "local-hash:seed=" + std::to_string(seed_) + ",dim=" + std::to_string(dim_) +
               (drop_stopwords_ ? ",stopwords=drop" : ",stopwords=keep");
    }

private:
    std::uint64_t seed_;
    std::size_t dim_;
    bool drop_stopwords_;
};

/// Client for embedding services that accept {"model", "input": [...]} and
/// reply {"data": [{"embedding": [...]}, ...]}. The bearer token is read from
/// the environment variable named by `api_key_env`.
class RemoteEmbedder final : public EmbeddingBackend {
public:
    explicit RemoteEmbedder(EmbeddingBackendSpec spec) : spec_(std::move(spec)) {
        if (spec_.endpoint.empty()) throw Error("remote embedding backend requires an endpoint");
        if (spec_.batch_size == 0) spec_.batch_size = 1;
    }

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) const override {
        const std::size_t n_batches = (texts.size() + spec_.batch_size - 1) / spec_.batch_size;
        std::vector<std::vector<EmbeddingVector>> batches(n_batches);
        const std::string token = env_secret(spec_.api_key_env);
        parallel_for(n_batches, spec_.max_in_flight, [&](std::size_t b) {
            const std::size_t begin = b * spec_.batch_size;
            const std::size_t end = std::min(texts.size(), begin + spec_.batch_size);
            nlohmann::json body{{"model", spec_.model},
                                {"input", std::vector<std::string>(texts.begin() + begin, texts.begin() + end)}};
            batches[b] = parse_reply(post_json(spec_.endpoint, body, token, spec_.retry), end - begin);
        });
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (auto& batch : batches)
            for (auto& v : batch) out.push_back(std::move(v));
        for (const auto& v : out)
            if (v.dim() != out.front().dim()) throw Error("dimension mismatch within embedding reply");
        return out;
    }

    std::string id() const override { return "remote:" + spec_.endpoint + "#" + spec_.model; }

private:
    std::vector<EmbeddingVector> parse_reply(const nlohmann::json& reply, std::size_t expected) const {
        if (!reply.contains("data") || !reply["data"].is_array()) throw Error("embedding reply has no 'data' array");
        const auto& data = reply["data"];
        if (data.size() != expected)
            throw Error("embedding reply has " + std::to_string(data.size()) + " items, expected " + std::to_string(expected));
        std::vector<EmbeddingVector> out;
        for (const auto& item : data) {
            EmbeddingVector v;
            v.values = item.at("embedding").get<std::vector<double>>();
            require_finite(v);
            if (spec_.dim != 0 && v.dim() != spec_.dim)
                throw Error("dimension mismatch: backend returned " + std::to_string(v.dim()) + ", expected " +
                            std::to_string(spec_.dim));
            v.degenerate = l2_norm(v) == 0.0;
            out.push_back(std::move(v));
        }
        return out;
    }

    EmbeddingBackendSpec spec_;
};

inline std::unique_ptr<EmbeddingBackend> make_embedding_backend(const EmbeddingBackendSpec& spec) {
    if (spec.kind == EmbeddingBackendKind::deterministic_local)
        return std::make_unique<LocalEmbedder>(spec.seed, spec.dim, spec.drop_stopwords);
    return std::make_unique<RemoteEmbedder>(spec);
}

inline std::vector<EmbeddingVector> embed(const EmbeddingBackendSpec& spec, const std::vector<std::string>& texts) {
    return make_embedding_backend(spec)->embed(texts);
}

} // namespace collsum
