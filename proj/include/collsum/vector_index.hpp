#pragma once

#include "collsum/corpus.hpp"
#include "collsum/embed.hpp"
#include "collsum/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace collsum {

enum class Metric { cosine, inner_product, euclidean };
enum class IndexMode { exact, partitioned };

inline Metric parse_metric(std::string_view s) {
    if (s == "cosine") return Metric::cosine;
    if (s == "inner-product" || s == "ip") return Metric::inner_product;
    if (s == "euclidean" || s == "l2") return Metric::euclidean;
    throw Error("unknown metric '" + std::string(s) + "'");
}

inline IndexMode parse_index_mode(std::string_view s) {
    if (s == "exact") return IndexMode::exact;
    if (s == "partitioned") return IndexMode::partitioned;
    throw Error("unknown index mode '" + std::string(s) + "'");
}

/// Similarity for cosine and inner-product, distance for euclidean.
inline double metric_score(Metric metric, const EmbeddingVector& a, const EmbeddingVector& b) {
    switch (metric) {
    case Metric::cosine: return cosine(a, b);
    case Metric::inner_product: return dot(a, b);
    case Metric::euclidean: {
        if (a.dim() != b.dim()) throw Error("dimension mismatch");
        double s = 0.0;
        for (std::size_t i = 0; i < a.dim(); ++i) {
            const double d = a.values[i] - b.values[i];
            s += d * d;
        }
        return std::sqrt(s);
    }
    }
    return 0.0;
}

/// True when score `a` ranks ahead of score `b` under `metric`.
inline bool score_better(Metric metric, double a, double b) {
    return metric == Metric::euclidean ? a < b : a > b;
}

struct Neighbor {
    std::string id;
    double score = 0.0;
    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct PartitionOptions {
    std::size_t n_cells = 0; ///< 0 picks round(sqrt(n)).
    std::size_t n_probe = 1;
    std::size_t iterations = 25;
    std::uint64_t seed = 0;
};

/// Immutable similarity index. Entries are stored sorted by id, so results do
/// not depend on insertion order; ties rank by ascending id.
class VectorIndex {
public:
    VectorIndex(std::vector<std::pair<std::string, EmbeddingVector>> entries, Metric metric, IndexMode mode,
                PartitionOptions partition = {})
        : entries_(std::move(entries)), metric_(metric), mode_(mode), partition_(partition) {
        if (entries_.empty()) throw Error("cannot build an index from zero vectors");
        std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (entries_[i].second.dim() != entries_.front().second.dim())
                throw Error("mixed dimensions in index: '" + entries_[i].first + "' has " +
                            std::to_string(entries_[i].second.dim()) + ", expected " +
                            std::to_string(entries_.front().second.dim()));
            require_finite(entries_[i].second);
            if (i > 0 && entries_[i].first == entries_[i - 1].first)
                throw Error("duplicate id in index: '" + entries_[i].first + "'");
        }
        if (mode_ == IndexMode::partitioned) build_cells();
    }

    std::size_t size() const noexcept { return entries_.size(); }
    std::size_t dim() const noexcept { return entries_.front().second.dim(); }
    Metric metric() const noexcept { return metric_; }
    IndexMode mode() const noexcept { return mode_; }
    std::size_t n_cells() const noexcept { return cells_.size(); }
    const std::vector<std::pair<std::string, EmbeddingVector>>& entries() const noexcept { return entries_; }

    /// Top-`u` entries for `q`. In partitioned mode only the `n_probe` cells
    /// whose centroids rank best for `q` are scanned (default from build options).
    std::vector<Neighbor> query(const EmbeddingVector& q, std::size_t u, std::optional<std::size_t> n_probe = {}) const {
        if (u == 0) throw Error("u must be at least 1");
        if (q.dim() != dim())
            throw Error("query dimension " + std::to_string(q.dim()) + " does not match index dimension " +
                        std::to_string(dim()));
        std::vector<std::size_t> candidates;
        if (mode_ == IndexMode::exact) {
            candidates.resize(entries_.size());
            std::iota(candidates.begin(), candidates.end(), 0);
        } else {
            candidates = probe(q, n_probe.value_or(partition_.n_probe));
        }
        std::vector<Neighbor> scored;
        scored.reserve(candidates.size());
        for (std::size_t i : candidates) scored.push_back({entries_[i].first, metric_score(metric_, q, entries_[i].second)});
        const std::size_t keep = std::min(u, scored.size());
        auto order = [this](const Neighbor& a, const Neighbor& b) {
            if (a.score != b.score) return score_better(metric_, a.score, b.score);
            return a.id < b.id;
        };
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), order);
        scored.resize(keep);
        return scored;
    }

private:
    static double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            s += d * d;
        }
        return s;
    }

    std::vector<double> cell_space(const EmbeddingVector& v) const {
        if (metric_ != Metric::cosine) return v.values;
        const double n = l2_norm(v);
        std::vector<double> out = v.values;
        if (n > 0.0)
            for (double& x : out) x /= n;
        return out;
    }

    // Seeded k-means++ initialisation followed by Lloyd iterations.
    void build_cells() {
        const std::size_t n = entries_.size();
        std::size_t k = partition_.n_cells ? partition_.n_cells
                                           : static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(n))));
        k = std::clamp<std::size_t>(k, 1, n);
        std::vector<std::vector<double>> points;
        points.reserve(n);
        for (const auto& e : entries_) points.push_back(cell_space(e.second));

        std::mt19937_64 rng(partition_.seed);
        auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        centroids_.clear();
        centroids_.push_back(points[rng() % n]);
        std::vector<double> best(n, std::numeric_limits<double>::infinity());
        while (centroids_.size() < k) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                best[i] = std::min(best[i], sq_dist(points[i], centroids_.back()));
                total += best[i];
            }
            std::size_t pick = 0;
            if (total > 0.0) {
                double r = uniform() * total;
                for (pick = 0; pick + 1 < n; ++pick) {
                    r -= best[pick];
                    if (r < 0.0) break;
                }
            } else {
                pick = centroids_.size() % n;
            }
            centroids_.push_back(points[pick]);
        }

        std::vector<std::size_t> assignment(n, 0);
        for (std::size_t iter = 0; iter < std::max<std::size_t>(1, partition_.iterations); ++iter) {
            bool changed = iter == 0;
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t arg = 0;
                double d_best = std::numeric_limits<double>::infinity();
                for (std::size_t c = 0; c < k; ++c) {
                    const double d = sq_dist(points[i], centroids_[c]);
                    if (d < d_best) {
                        d_best = d;
                        arg = c;
                    }
                }
                if (assignment[i] != arg) changed = true;
                assignment[i] = arg;
            }
            std::vector<std::vector<double>> sums(k, std::vector<double>(dim(), 0.0));
            std::vector<std::size_t> counts(k, 0);
            for (std::size_t i = 0; i < n; ++i) {
                ++counts[assignment[i]];
                for (std::size_t d = 0; d < dim(); ++d) sums[assignment[i]][d] += points[i][d];
            }
            for (std::size_t c = 0; c < k; ++c) {
                if (counts[c] == 0) continue;
                for (std::size_t d = 0; d < dim(); ++d) centroids_[c][d] = sums[c][d] / static_cast<double>(counts[c]);
            }
            if (!changed) break;
        }
        cells_.assign(k, {});
        for (std::size_t i = 0; i < n; ++i) cells_[assignment[i]].push_back(i);
    }

    std::vector<std::size_t> probe(const EmbeddingVector& q, std::size_t n_probe) const {
        const std::size_t k = cells_.size();
        n_probe = std::clamp<std::size_t>(n_probe, 1, k);
        std::vector<std::pair<double, std::size_t>> ranked;
        ranked.reserve(k);
        for (std::size_t c = 0; c < k; ++c) {
            EmbeddingVector centroid{centroids_[c], false};
            ranked.emplace_back(metric_score(metric_, q, centroid), c);
        }
        std::sort(ranked.begin(), ranked.end(), [this](const auto& a, const auto& b) {
            if (a.first != b.first) return score_better(metric_, a.first, b.first);
            return a.second < b.second;
        });
        std::vector<std::size_t> out;
        for (std::size_t p = 0; p < n_probe; ++p) out.insert(out.end(), cells_[ranked[p].second].begin(), cells_[ranked[p].second].end());
        return out;
    }

    std::vector<std::pair<std::string, EmbeddingVector>> entries_;
    Metric metric_;
    IndexMode mode_;
    PartitionOptions partition_;
    std::vector<std::vector<double>> centroids_;
    std::vector<std::vector<std::size_t>> cells_;
};

inline VectorIndex build_index(std::vector<std::pair<std::string, EmbeddingVector>> vectors, Metric metric = Metric::cosine,
                               IndexMode mode = IndexMode::exact, PartitionOptions partition = {}) {
    return VectorIndex(std::move(vectors), metric, mode, partition);
}

inline std::vector<Neighbor> query_nearest(const VectorIndex& index, const EmbeddingVector& q, std::size_t u,
                                           std::optional<std::size_t> n_probe = {}) {
    return index.query(q, u, n_probe);
}

struct QueryResult {
    Corpus subset;
    std::vector<Neighbor> ranking;
};

/// Embeds the first `max_tokens` whitespace tokens of every document and the
/// query, then keeps the `u` documents nearest to the query (D').
/// The subset is in rank order.
inline QueryResult query_documents(const Corpus& corpus, const EmbeddingBackend& backend, const std::string& q,
                                   std::size_t u, std::size_t max_tokens = 512, Metric metric = Metric::cosine) {
    std::vector<std::string> texts;
    texts.reserve(corpus.size() + 1);
    for (const auto& d : corpus) texts.push_back(truncate_whitespace_tokens(d.text, max_tokens));
    texts.push_back(truncate_whitespace_tokens(q, max_tokens));
    auto vectors = backend.embed(texts);
    if (vectors.size() != texts.size()) throw Error("embedding backend returned the wrong number of vectors");
    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    for (std::size_t i = 0; i < corpus.size(); ++i) entries.emplace_back(corpus[i].id, std::move(vectors[i]));
    const auto index = build_index(std::move(entries), metric, IndexMode::exact);
    auto ranking = index.query(vectors.back(), u);
    std::vector<Document> docs;
    docs.reserve(ranking.size());
    for (const auto& n : ranking) docs.push_back(*corpus.find(n.id));
    return {Corpus(std::move(docs)), std::move(ranking)};
}

} // namespace collsum
