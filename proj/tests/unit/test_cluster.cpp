#include "collsum/cluster.hpp"
#include "collsum/hdbscan.hpp"
#include "collsum/projection.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

using namespace collsum;

namespace {

std::vector<Point> uniform_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> pts(n, Point(dim));
    for (auto& p : pts)
        for (double& x : p) x = u(rng);
    return pts;
}

double kruskal_weight(const std::vector<Point>& pts, const std::vector<double>& core) {
    struct E {
        double w;
        std::size_t a, b;
    };
    std::vector<E> edges;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            edges.push_back({std::max({core[i], core[j], euclidean_distance(pts[i], pts[j])}), i, j});
    std::sort(edges.begin(), edges.end(), [](const E& x, const E& y) { return x.w < y.w; });
    std::vector<std::size_t> parent(pts.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    double total = 0.0;
    for (const auto& e : edges) {
        const auto ra = find(e.a), rb = find(e.b);
        if (ra == rb) continue;
        parent[ra] = rb;
        total += e.w;
    }
    return total;
}

std::vector<ProjectedPoint> as_projected(const std::vector<Point>& pts) {
    std::vector<ProjectedPoint> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "p%03zu", i);
        out.push_back({id, pts[i]});
    }
    return out;
}

std::vector<EmbeddingVector> as_embeddings(const std::vector<Point>& pts) {
    std::vector<EmbeddingVector> out;
    for (const auto& p : pts) out.push_back({p, false});
    return out;
}

} // namespace

TEST(CoreDistances, Collinear) {
    EXPECT_EQ(core_distances({{0.0}, {1.0}, {2.0}}, 1), (std::vector<double>{1.0, 1.0, 1.0}));
    EXPECT_EQ(core_distances({{0.0}, {1.0}, {2.0}}, 2), (std::vector<double>{2.0, 1.0, 2.0}));
}

TEST(CoreDistances, DuplicatesAreZero) {
    const auto c = core_distances({{1.0, 1.0}, {1.0, 1.0}, {5.0, 5.0}}, 1);
    EXPECT_EQ(c[0], 0.0);
    EXPECT_EQ(c[1], 0.0);
}

TEST(CoreDistances, MatchesSortedDistanceOracle) {
    const auto pts = uniform_points(50, 3, 1);
    const auto core = core_distances(pts, 5);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::vector<double> d;
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (j != i) d.push_back(euclidean_distance(pts[i], pts[j]));
        std::sort(d.begin(), d.end());
        EXPECT_EQ(core[i], d[4]);
    }
}

TEST(CoreDistances, RejectsBadK) {
    EXPECT_THROW(core_distances({{0.0}, {1.0}}, 0), Error);
    EXPECT_THROW(core_distances({{0.0}, {1.0}}, 2), Error);
}

TEST(Mst, TwoPoints) {
    const std::vector<Point> pts{{0.0, 0.0}, {3.0, 4.0}};
    const auto core = core_distances(pts, 1);
    const auto mst = mutual_reachability_mst(pts, core);
    ASSERT_EQ(mst.size(), 1u);
    EXPECT_DOUBLE_EQ(mst[0].weight, 5.0);
}

TEST(Mst, MatchesKruskalOracle) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto pts = uniform_points(seed % 2 ? 30 : 50, 4, seed + 100);
        const auto core = core_distances(pts, 3);
        const auto mst = mutual_reachability_mst(pts, core);
        ASSERT_EQ(mst.size(), pts.size() - 1);
        double total = 0.0;
        for (const auto& e : mst) total += e.weight;
        EXPECT_NEAR(total, kruskal_weight(pts, core), 1e-9);
    }
}

TEST(Mst, IdenticalPointsGiveZeroWeights) {
    const std::vector<Point> pts(6, Point{2.0, 2.0});
    for (const auto& e : mutual_reachability_mst(pts, core_distances(pts, 2))) EXPECT_EQ(e.weight, 0.0);
}

TEST(MutualReachability, SymmetricAndDominatesEuclidean) {
    const auto pts = uniform_points(20, 2, 9);
    const auto core = core_distances(pts, 3);
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j) {
            const double d = mutual_reachability(pts[i], pts[j], core[i], core[j]);
            EXPECT_EQ(d, mutual_reachability(pts[j], pts[i], core[j], core[i]));
            EXPECT_GE(d, euclidean_distance(pts[i], pts[j]));
        }
}

TEST(Hdbscan, TwoBlobs) {
    std::vector<int> planted;
    const auto pts = testutil::blobs({{0, 0}, {20, 20}}, 50, 1.0, 21, &planted);
    const auto r = hdbscan(pts, {.min_cluster_size = 10});
    EXPECT_EQ(r.n_clusters, 2u);
    EXPECT_GE(testutil::adjusted_rand(r.labels, planted), 0.95);
}

TEST(Hdbscan, ThreeBlobs) {
    std::vector<int> planted;
    const auto pts = testutil::blobs({{0, 0, 0}, {15, 0, 0}, {0, 15, 0}}, 40, 1.0, 22, &planted);
    const auto r = hdbscan(pts, {.min_cluster_size = 8});
    EXPECT_EQ(r.n_clusters, 3u);
    EXPECT_GE(testutil::adjusted_rand(r.labels, planted), 0.95);
}

TEST(Hdbscan, LargeMinClusterSizeNeverSplits) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto pts = uniform_points(40, 2, seed);
        for (auto sel : {ClusterSelection::excess_of_mass, ClusterSelection::leaf, ClusterSelection::top_k}) {
            const auto r = hdbscan(pts, {.min_cluster_size = 21, .selection = sel, .k = 3});
            EXPECT_LE(r.n_clusters, 1u);
        }
    }
}

TEST(Hdbscan, TenPointCondensedTreeByHand) {
    // Two tight groups of five at distance 10; min_cluster_size = 5 makes the
    // root split into exactly two children; each group then dissolves at once.
    std::vector<Point> pts;
    for (int i = 0; i < 5; ++i) pts.push_back({static_cast<double>(i) * 0.1});
    for (int i = 0; i < 5; ++i) pts.push_back({10.0 + static_cast<double>(i) * 0.1});
    const auto r = hdbscan(pts, {.min_cluster_size = 5, .min_samples = 1});
    EXPECT_EQ(r.tree.n_clusters(), 3u);
    // Merge distance of the groups is 9.6, so both children are born at 1/9.6.
    EXPECT_DOUBLE_EQ(r.tree.birth_lambda[1], 1.0 / 9.6);
    EXPECT_DOUBLE_EQ(r.tree.birth_lambda[2], 1.0 / 9.6);
    // Inside a group all points leave together at the largest gap, 0.1.
    EXPECT_NEAR(r.tree.stability[1], 5 * (10.0 - 1.0 / 9.6), 1e-9);
    EXPECT_EQ(r.tree.stability[0], 10 * (1.0 / 9.6));
    EXPECT_EQ(r.n_clusters, 2u);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(r.labels[i], r.labels[0]);
    EXPECT_NE(r.labels[0], r.labels[5]);
    EXPECT_EQ(std::count(r.labels.begin(), r.labels.end(), -1), 0);
}

TEST(Hdbscan, IdenticalPointsOneCluster) {
    const std::vector<Point> pts(12, Point{1.0, -1.0});
    const auto r = hdbscan(pts, {.min_cluster_size = 3});
    EXPECT_EQ(r.n_clusters, 1u);
    EXPECT_EQ(std::count(r.labels.begin(), r.labels.end(), -1), 0);
}

TEST(Hdbscan, OutlierBecomesNoise) {
    auto pts = testutil::blobs({{0, 0}, {30, 0}}, 20, 0.5, 5);
    pts.push_back({15.0, 40.0});
    const auto r = hdbscan(pts, {.min_cluster_size = 5});
    EXPECT_EQ(r.n_clusters, 2u);
    EXPECT_EQ(r.labels.back(), -1);
}

TEST(Hdbscan, RejectsBadParameters) {
    const auto pts = uniform_points(10, 2, 1);
    EXPECT_THROW(hdbscan(pts, {.min_cluster_size = 1}), Error);
    EXPECT_THROW(hdbscan(pts, {.min_cluster_size = 11}), Error);
    EXPECT_THROW(hdbscan(pts, {.min_cluster_size = 2, .selection = ClusterSelection::top_k, .k = 0}), Error);
}

TEST(Hdbscan, MinClusterSizeMonotone) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto pts = testutil::blobs({{0, 0}, {12, 0}, {0, 12}, {12, 12}}, 25, 1.5, 300 + seed);
        std::size_t previous = pts.size();
        for (std::size_t m = 2; m <= 60; m += 2) {
            const auto r = hdbscan(pts, {.min_cluster_size = m});
            EXPECT_LE(r.n_clusters, previous) << "seed " << seed << " mcs " << m;
            previous = r.n_clusters;
        }
    }
}

TEST(Hdbscan, LeafSelectionPicksAllLeaves) {
    const auto pts = testutil::blobs({{0, 0}, {20, 0}, {40, 0}}, 20, 1.0, 9);
    const auto r = hdbscan(pts, {.min_cluster_size = 5, .selection = ClusterSelection::leaf});
    std::size_t leaves = 0;
    for (std::size_t c = 0; c < r.tree.n_clusters(); ++c) leaves += r.tree.children[c].empty();
    EXPECT_EQ(r.n_clusters, leaves);
}

TEST(Hdbscan, TopKGivesExactlyKWhenAvailable) {
    const auto pts = testutil::blobs({{0, 0}, {10, 0}, {20, 0}, {30, 0}, {40, 0}}, 20, 1.0, 10);
    for (std::size_t k = 1; k <= 5; ++k) {
        const auto r = hdbscan(pts, {.min_cluster_size = 5, .selection = ClusterSelection::top_k, .k = k});
        EXPECT_EQ(r.n_clusters, k);
        // Selected clusters are pairwise disjoint: no selected ancestor of another.
        std::set<std::size_t> chosen(r.selected.begin(), r.selected.end());
        for (std::size_t c : r.selected) {
            for (std::size_t a = c; a != 0;) {
                a = r.tree.parent[a];
                EXPECT_FALSE(chosen.count(a) && a != c);
            }
        }
    }
}

TEST(Hdbscan, TopKMaximisesTotalStability) {
    // Exhaustive oracle: every antichain of size k in the condensed tree.
    const auto pts = testutil::blobs({{0, 0}, {6, 0}, {20, 0}, {26, 0}, {50, 50}}, 12, 1.0, 77);
    const auto base = hdbscan(pts, {.min_cluster_size = 4, .selection = ClusterSelection::leaf});
    const auto& t = base.tree;
    const std::size_t m = t.n_clusters();
    ASSERT_LE(m, 20u);
    auto is_ancestor = [&t](std::size_t a, std::size_t c) {
        while (c != 0) {
            c = t.parent[c];
            if (c == a) return true;
        }
        return false;
    };
    for (std::size_t k = 1; k <= 4; ++k) {
        double best = -1.0;
        for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
            if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
            bool ok = true;
            double total = 0.0;
            for (std::size_t a = 0; a < m && ok; ++a) {
                if (!(mask >> a & 1)) continue;
                total += t.stability[a];
                for (std::size_t b = 0; b < m; ++b)
                    if (a != b && (mask >> b & 1) && is_ancestor(a, b)) ok = false;
            }
            if (ok) best = std::max(best, total);
        }
        const auto r = hdbscan(pts, {.min_cluster_size = 4, .selection = ClusterSelection::top_k, .k = k});
        double got = 0.0;
        for (double s : r.stabilities) got += s;
        EXPECT_NEAR(got, best, 1e-9 * std::max(1.0, best)) << "k=" << k;
    }
}

TEST(ClusterPoints, PermutationInvariantAfterCanonicalRelabel) {
    const auto pts = testutil::blobs({{0, 0}, {10, 10}, {-10, 10}}, 15, 1.0, 31);
    auto projected = as_projected(pts);
    const auto a = cluster_points(projected, {.min_cluster_size = 5});
    std::mt19937_64 rng(4);
    std::shuffle(projected.begin(), projected.end(), rng);
    const auto b = cluster_points(projected, {.min_cluster_size = 5});
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.stabilities, b.stabilities);
    EXPECT_EQ(a.labels.at("p000"), 0);
    EXPECT_EQ(a.labels.size(), pts.size());
}

TEST(ClusterPoints, JsonRoundTrip) {
    const auto a = cluster_points(as_projected(testutil::blobs({{0, 0}, {10, 10}}, 10, 0.5, 2)), {.min_cluster_size = 4});
    const auto b = cluster_assignment_from_json(to_json(a));
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.stabilities, b.stabilities);
}

TEST(PartitionCorpus, ConservationAndPolicies) {
    std::vector<Document> docs;
    ClusterAssignment a;
    for (int i = 0; i < 10; ++i) {
        docs.push_back({"d" + std::to_string(i), {}, "text " + std::to_string(i), {}});
        a.labels["d" + std::to_string(i)] = i < 3 ? kNoise : i % 2;
    }
    a.n_clusters = 2;
    const Corpus corpus(docs);
    const auto dropped = partition_corpus(corpus, a);
    std::size_t total = 0;
    for (const auto& [c, ds] : dropped) total += ds.size();
    EXPECT_EQ(total + 3, corpus.size());
    EXPECT_FALSE(dropped.count(kNoise));
    const auto kept = partition_corpus(corpus, a, NoisePolicy::noise_topic);
    EXPECT_EQ(kept.at(kNoise).size(), 3u);
    a.labels.erase("d9");
    EXPECT_THROW(partition_corpus(corpus, a), Error);
}

TEST(PartitionCorpus, SingleCluster) {
    Corpus corpus({{"a", {}, "x", {}}, {"b", {}, "y", {}}});
    ClusterAssignment a;
    a.labels = {{"a", 0}, {"b", 0}};
    a.n_clusters = 1;
    const auto p = partition_corpus(corpus, a);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p.at(0).size(), 2u);
}

TEST(Projection, PcaPreservesDistancesInPlanarData) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g(0.0, 1.0);
    Point u(10), v(10);
    for (auto& x : u) x = g(rng);
    for (auto& x : v) x = g(rng);
    std::vector<Point> pts;
    for (int i = 0; i < 30; ++i) {
        const double a = g(rng) * 3, b = g(rng);
        Point p(10);
        for (int d = 0; d < 10; ++d) p[d] = 1.0 + a * u[d] + b * v[d];
        pts.push_back(p);
    }
    std::vector<std::string> ids;
    for (int i = 0; i < 30; ++i) ids.push_back(std::to_string(i));
    const auto proj = project(as_embeddings(pts), ids, {.target_dim = 2});
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j)
            EXPECT_NEAR(euclidean_distance(proj[i].coords, proj[j].coords), euclidean_distance(pts[i], pts[j]), 1e-6);
}

TEST(Projection, DeterministicAndSignFixed) {
    const auto pts = uniform_points(20, 6, 13);
    std::vector<std::string> ids;
    for (int i = 0; i < 20; ++i) ids.push_back(std::to_string(i));
    const auto a = project(as_embeddings(pts), ids, {.target_dim = 3});
    const auto b = project(as_embeddings(pts), ids, {.target_dim = 3});
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].coords, b[i].coords);
    // Negating the input flips every principal axis; the sign rule must undo it.
    auto neg = pts;
    for (auto& p : neg)
        for (double& x : p) x = -x;
    const auto c = project(as_embeddings(neg), ids, {.target_dim = 3});
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t d = 0; d < 3; ++d) EXPECT_NEAR(std::abs(a[i].coords[d]), std::abs(c[i].coords[d]), 1e-9);
}

TEST(Projection, SeparatedBlobsStaySeparated) {
    std::vector<int> labels;
    Point c0(64, 0.0), c1(64, 0.0);
    c1[0] = 30;
    c1[5] = 30;
    const auto pts = testutil::blobs({c0, c1}, 30, 1.0, 14, &labels);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < pts.size(); ++i) ids.push_back(std::to_string(i));
    for (auto method : {ProjectionMethod::pca, ProjectionMethod::neighbor_embedding}) {
        const auto proj = project(as_embeddings(pts), ids, {.method = method, .target_dim = 2, .seed = 1});
        double max_intra = 0.0, min_inter = 1e300;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j) {
                const double d = euclidean_distance(proj[i].coords, proj[j].coords);
                if (labels[i] == labels[j]) max_intra = std::max(max_intra, d);
                else min_inter = std::min(min_inter, d);
            }
        EXPECT_GT(min_inter, max_intra) << "method " << static_cast<int>(method);
    }
}

TEST(Projection, NeighborEmbeddingSeeded) {
    const auto pts = uniform_points(40, 8, 15);
    std::vector<std::string> ids;
    for (int i = 0; i < 40; ++i) ids.push_back(std::to_string(i));
    const ProjectionOptions opts{.method = ProjectionMethod::neighbor_embedding, .target_dim = 2, .seed = 5, .n_neighbors = 8};
    const auto a = project(as_embeddings(pts), ids, opts);
    const auto b = project(as_embeddings(pts), ids, opts);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].coords, b[i].coords);
        for (double x : a[i].coords) EXPECT_TRUE(std::isfinite(x));
    }
}

TEST(Projection, RejectsTooFewVectorsOrTooLargeTarget) {
    const auto pts = uniform_points(3, 4, 1);
    EXPECT_THROW(project(as_embeddings(pts), {"a", "b", "c"}, {.target_dim = 3}), Error);
    EXPECT_THROW(project(as_embeddings(uniform_points(10, 4, 1)),
                         {"0", "1", "2", "3", "4", "5", "6", "7", "8", "9"}, {.target_dim = 4}),
                 Error);
}

TEST(Projection, FitAbNearReferenceCurve) {
    const auto [a, b] = detail::fit_ab(0.1);
    EXPECT_NEAR(a, 1.577, 0.05);
    EXPECT_NEAR(b, 0.895, 0.02);
}
