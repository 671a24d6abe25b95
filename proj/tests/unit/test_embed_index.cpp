#include "collsum/embed.hpp"
#include "collsum/vector_index.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace collsum;

namespace {

EmbeddingVector random_vector(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> g(0.0, 1.0);
    EmbeddingVector v{std::vector<double>(dim), false};
    for (double& x : v.values) x = g(rng);
    return v;
}

std::vector<std::pair<std::string, EmbeddingVector>> random_entries(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
    std::vector<std::pair<std::string, EmbeddingVector>> out;
    for (std::size_t i = 0; i < n; ++i) out.emplace_back("v" + std::to_string(i), random_vector(rng, dim));
    return out;
}

// Full scan, full sort, then cut to u.
std::vector<Neighbor> brute_force(const std::vector<std::pair<std::string, EmbeddingVector>>& entries, Metric metric,
                                  const EmbeddingVector& q, std::size_t u) {
    std::vector<Neighbor> all;
    for (const auto& [id, v] : entries) {
        double score = 0.0;
        if (metric == Metric::euclidean) {
            for (std::size_t i = 0; i < v.dim(); ++i) score += (v.values[i] - q.values[i]) * (v.values[i] - q.values[i]);
            score = std::sqrt(score);
        } else {
            double d = 0, nq = 0, nv = 0;
            for (std::size_t i = 0; i < v.dim(); ++i) {
                d += v.values[i] * q.values[i];
                nq += q.values[i] * q.values[i];
                nv += v.values[i] * v.values[i];
            }
            score = metric == Metric::cosine ? std::clamp(d / std::sqrt(nq * nv), -1.0, 1.0) : d;
        }
        all.push_back({id, score});
    }
    std::sort(all.begin(), all.end(), [metric](const Neighbor& a, const Neighbor& b) {
        if (a.score != b.score) return metric == Metric::euclidean ? a.score < b.score : a.score > b.score;
        return a.id < b.id;
    });
    all.resize(std::min(u, all.size()));
    return all;
}

std::vector<std::string> ids(const std::vector<Neighbor>& ns) {
    std::vector<std::string> out;
    for (const auto& n : ns) out.push_back(n.id);
    return out;
}

} // namespace

TEST(LocalEmbedder, Deterministic) {
    const auto v = embed({}, {"a", "a"});
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0], v[1]);
    EXPECT_EQ(v[0].dim(), 256u);
    LocalEmbedder other(7, 256);
    EXPECT_EQ(other.embed_one("a"), v[0]);
}

TEST(LocalEmbedder, EmptyTextIsDegenerateZero) {
    const auto v = embed({}, {""});
    EXPECT_TRUE(v[0].degenerate);
    for (double x : v[0].values) EXPECT_EQ(x, 0.0);
}

TEST(LocalEmbedder, SharedWordsRaiseSimilarity) {
    const auto v = embed({}, {"dog park", "dog park walk", "stock market"});
    EXPECT_GT(cosine(v[0], v[1]), cosine(v[0], v[2]));
    // Two of three unit-count buckets shared: cos is close to 2 / sqrt(2 * 3).
    EXPECT_NEAR(cosine(v[0], v[1]), 2.0 / std::sqrt(6.0), 0.25);
}

TEST(LocalEmbedder, UnitNormAndSeedMatters) {
    LocalEmbedder a(1, 64), b(2, 64);
    const auto va = a.embed_one("some words here"), vb = b.embed_one("some words here");
    EXPECT_NEAR(l2_norm(va), 1.0, 1e-12);
    EXPECT_NE(va, vb);
}

TEST(Cosine, SelfSimilarityAndRange) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
        const auto a = random_vector(rng, 16), b = random_vector(rng, 16);
        EXPECT_NEAR(cosine(a, a), 1.0, 1e-9);
        const double c = cosine(a, b);
        EXPECT_GE(c, -1.0);
        EXPECT_LE(c, 1.0);
    }
    EXPECT_THROW(dot(EmbeddingVector{{1, 2}, false}, EmbeddingVector{{1}, false}), Error);
}

TEST(VectorIndex, SingleVector) {
    auto index = build_index({{"only", EmbeddingVector{{1.0, 0.0}, false}}});
    EXPECT_EQ(index.size(), 1u);
    const auto r = query_nearest(index, EmbeddingVector{{1.0, 0.0}, false}, 1);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].id, "only");
    EXPECT_NEAR(r[0].score, 1.0, 1e-12);
}

TEST(VectorIndex, RejectsMixedDimensionsAndBadQueries) {
    EXPECT_THROW(build_index({{"a", EmbeddingVector{{1.0}, false}}, {"b", EmbeddingVector{{1.0, 2.0}, false}}}), Error);
    EXPECT_THROW(build_index({}), Error);
    auto index = build_index({{"a", EmbeddingVector{{1.0, 0.0}, false}}});
    EXPECT_THROW(index.query(EmbeddingVector{{1.0}, false}, 1), Error);
    EXPECT_THROW(index.query(EmbeddingVector{{1.0, 0.0}, false}, 0), Error);
}

TEST(VectorIndex, ExactMatchesBruteForceForAllMetrics) {
    std::mt19937_64 rng(42);
    for (Metric metric : {Metric::cosine, Metric::inner_product, Metric::euclidean}) {
        const auto entries = random_entries(rng, 1000, 12);
        const auto index = build_index(entries, metric);
        for (int t = 0; t < 20; ++t) {
            const auto q = random_vector(rng, 12);
            const auto got = index.query(q, 10);
            const auto want = brute_force(entries, metric, q, 10);
            ASSERT_EQ(ids(got), ids(want));
            for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i].score, want[i].score, 1e-12);
        }
    }
}

TEST(VectorIndex, SelfMatchFirst) {
    std::mt19937_64 rng(5);
    const auto entries = random_entries(rng, 200, 8);
    const auto index = build_index(entries);
    const auto r = index.query(entries[17].second, 1);
    EXPECT_EQ(r[0].id, entries[17].first);
    EXPECT_NEAR(r[0].score, 1.0, 1e-9);
}

TEST(VectorIndex, LargeUReturnsAllSorted) {
    std::mt19937_64 rng(6);
    const auto entries = random_entries(rng, 30, 4);
    const auto index = build_index(entries);
    const auto r = index.query(random_vector(rng, 4), 100);
    ASSERT_EQ(r.size(), 30u);
    for (std::size_t i = 1; i < r.size(); ++i) EXPECT_GE(r[i - 1].score, r[i].score);
}

TEST(VectorIndex, TiesBreakByAscendingIdAndOrderInvariance) {
    std::vector<std::pair<std::string, EmbeddingVector>> entries{
        {"c", EmbeddingVector{{1.0, 0.0}, false}}, {"a", EmbeddingVector{{1.0, 0.0}, false}},
        {"b", EmbeddingVector{{0.0, 1.0}, false}}, {"d", EmbeddingVector{{2.0, 0.0}, false}}};
    const auto r = build_index(entries).query(EmbeddingVector{{1.0, 0.0}, false}, 4);
    EXPECT_EQ(ids(r), (std::vector<std::string>{"a", "c", "d", "b"}));

    std::mt19937_64 rng(7);
    auto many = random_entries(rng, 300, 6);
    const auto q = random_vector(rng, 6);
    const auto before = build_index(many).query(q, 25);
    std::shuffle(many.begin(), many.end(), rng);
    EXPECT_EQ(build_index(many).query(q, 25), before);
}

TEST(VectorIndex, PartitionedFullProbeEqualsExact) {
    std::mt19937_64 rng(8);
    for (Metric metric : {Metric::cosine, Metric::euclidean}) {
        const auto entries = random_entries(rng, 500, 10);
        const auto exact = build_index(entries, metric);
        const auto part = build_index(entries, metric, IndexMode::partitioned, {.n_cells = 16, .n_probe = 2, .seed = 3});
        EXPECT_EQ(part.n_cells(), 16u);
        for (int t = 0; t < 10; ++t) {
            const auto q = random_vector(rng, 10);
            EXPECT_EQ(part.query(q, 10, part.n_cells()), exact.query(q, 10));
            const auto partial = part.query(q, 10);
            EXPECT_LE(partial.size(), 10u);
        }
    }
}

TEST(QueryDocuments, SubsetInRankOrder) {
    Corpus corpus({{"a", {}, "Stock markets fell sharply today.", {}},
                   {"b", {}, "The dog ran in the park.", {}},
                   {"c", {}, "Dogs love the park and long walks.", {}}});
    LocalEmbedder backend(7, 256);
    const auto r = query_documents(corpus, backend, "The dog ran in the park.", 2);
    ASSERT_EQ(r.subset.size(), 2u);
    EXPECT_EQ(r.subset[0].id, "b");
    EXPECT_EQ(r.ranking[0].id, "b");
    const auto all = query_documents(corpus, backend, "anything", 3);
    EXPECT_EQ(all.subset.size(), corpus.size());
}
