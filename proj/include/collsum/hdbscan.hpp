#pragma once

#include "collsum/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace collsum {

using Point = std::vector<double>;

inline double euclidean_distance(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

/// Distance from each point to its k-th nearest neighbour (the point itself excluded).
inline std::vector<double> core_distances(const std::vector<Point>& points, std::size_t k) {
    if (k == 0) throw Error("min_samples must be positive");
    if (k >= points.size())
        throw Error("min_samples " + std::to_string(k) + " must be below the number of points " + std::to_string(points.size()));
    std::vector<double> core(points.size());
    std::vector<double> row;
    for (std::size_t i = 0; i < points.size(); ++i) {
        row.clear();
        for (std::size_t j = 0; j < points.size(); ++j)
            if (j != i) row.push_back(euclidean_distance(points[i], points[j]));
        std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
        core[i] = row[k - 1];
    }
    return core;
}

inline double mutual_reachability(const Point& a, const Point& b, double core_a, double core_b) {
    return std::max({core_a, core_b, euclidean_distance(a, b)});
}

struct MstEdge {
    std::size_t a = 0;
    std::size_t b = 0;
    double weight = 0.0;
};

/// Minimum spanning tree of the complete mutual-reachability graph (dense
/// Prim, O(n^2)). Returns n - 1 edges in the order they were added.
inline std::vector<MstEdge> mutual_reachability_mst(const std::vector<Point>& points, const std::vector<double>& core) {
    const std::size_t n = points.size();
    if (n < 2) throw Error("a spanning tree needs at least two points");
    if (core.size() != n) throw Error("core distance count does not match point count");
    std::vector<bool> in_tree(n, false);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> link(n, 0);
    std::vector<MstEdge> edges;
    edges.reserve(n - 1);
    std::size_t current = 0;
    in_tree[0] = true;
    for (std::size_t step = 1; step < n; ++step) {
        std::size_t next = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (in_tree[j]) continue;
            const double d = mutual_reachability(points[current], points[j], core[current], core[j]);
            if (d < best[j]) {
                best[j] = d;
                link[j] = current;
            }
            if (next == n || best[j] < best[next]) next = j;
        }
        in_tree[next] = true;
        edges.push_back({link[next], next, best[next]});
        current = next;
    }
    return edges;
}

enum class ClusterSelection { excess_of_mass, leaf, top_k };

inline ClusterSelection parse_cluster_selection(std::string_view s) {
    if (s == "excess-of-mass" || s == "eom") return ClusterSelection::excess_of_mass;
    if (s == "leaf") return ClusterSelection::leaf;
    if (s == "top-k") return ClusterSelection::top_k;
    throw Error("unknown cluster selection '" + std::string(s) + "'");
}

inline std::string to_string(ClusterSelection s) {
    switch (s) {
    case ClusterSelection::excess_of_mass: return "excess-of-mass";
    case ClusterSelection::leaf: return "leaf";
    case ClusterSelection::top_k: return "top-k";
    }
    return "?";
}

struct HdbscanOptions {
    std::size_t min_cluster_size = 5;
    std::optional<std::size_t> min_samples; ///< Defaults to min_cluster_size.
    ClusterSelection selection = ClusterSelection::excess_of_mass;
    std::size_t k = 10; ///< Cluster count for top-k selection.
    /// Lets the root of the condensed tree be selected, so a single dense
    /// group yields one cluster instead of all noise.
    bool allow_single_cluster = true;
};

/// One row of the condensed tree: `child` leaves `parent` at `lambda`.
/// `child` is a point index when `child_is_cluster` is false.
struct CondensedRow {
    std::size_t parent = 0;
    std::size_t child = 0;
    double lambda = 0.0;
    std::size_t child_size = 0;
    bool child_is_cluster = false;
};

struct CondensedTree {
    std::vector<CondensedRow> rows;
    std::vector<std::size_t> parent;   ///< Per cluster; the root (0) is its own parent.
    std::vector<double> birth_lambda;  ///< Per cluster.
    std::vector<double> stability;     ///< Per cluster.
    std::vector<std::vector<std::size_t>> children;
    std::vector<std::size_t> point_parent; ///< Cluster each point falls out of.

    std::size_t n_clusters() const noexcept { return parent.size(); }
};

struct HdbscanResult {
    std::vector<int> labels; ///< Per point; -1 is noise.
    std::size_t n_clusters = 0;
    std::vector<double> stabilities; ///< Per output label.
    std::vector<std::size_t> selected; ///< Condensed-tree cluster behind each output label.
    CondensedTree tree;
    std::vector<MstEdge> mst;
};

namespace detail {

// Lambda for zero distances; finite so stability arithmetic stays well defined.
inline constexpr double kMaxLambda = 1e250;

inline double lambda_of(double distance) { return distance > 0.0 ? std::min(1.0 / distance, kMaxLambda) : kMaxLambda; }

struct Dendrogram {
    std::vector<std::size_t> left, right, size;
    std::vector<double> distance;
    std::size_t n_points = 0;
    std::size_t root() const { return n_points + left.size() - 1; }
    std::size_t node_size(std::size_t node) const { return node < n_points ? 1 : size[node - n_points]; }
};

inline Dendrogram single_linkage(std::size_t n, std::vector<MstEdge> mst) {
    std::stable_sort(mst.begin(), mst.end(), [](const MstEdge& x, const MstEdge& y) { return x.weight < y.weight; });
    std::vector<std::size_t> uf(2 * n - 1);
    std::iota(uf.begin(), uf.end(), 0);
    auto find = [&uf](std::size_t x) {
        while (uf[x] != x) {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        return x;
    };
    Dendrogram d;
    d.n_points = n;
    for (const auto& e : mst) {
        const std::size_t ra = find(e.a), rb = find(e.b);
        const std::size_t node = n + d.left.size();
        d.left.push_back(ra);
        d.right.push_back(rb);
        d.distance.push_back(e.weight);
        d.size.push_back(d.node_size(ra) + d.node_size(rb));
        uf[ra] = node;
        uf[rb] = node;
    }
    return d;
}

inline void collect_points(const Dendrogram& d, std::size_t node, std::vector<std::size_t>& out) {
    std::vector<std::size_t> stack{node};
    while (!stack.empty()) {
        const std::size_t x = stack.back();
        stack.pop_back();
        if (x < d.n_points) {
            out.push_back(x);
        } else {
            stack.push_back(d.right[x - d.n_points]);
            stack.push_back(d.left[x - d.n_points]);
        }
    }
}

inline CondensedTree condense(const Dendrogram& d, std::size_t min_cluster_size) {
    CondensedTree t;
    t.point_parent.assign(d.n_points, 0);
    t.parent.push_back(0);
    t.birth_lambda.push_back(0.0);
    t.children.emplace_back();

    auto drop_points = [&](std::size_t node, std::size_t cluster, double lambda) {
        std::vector<std::size_t> pts;
        collect_points(d, node, pts);
        for (std::size_t p : pts) {
            t.rows.push_back({cluster, p, lambda, 1, false});
            t.point_parent[p] = cluster;
        }
    };
    auto new_cluster = [&](std::size_t parent, double lambda) {
        const std::size_t id = t.parent.size();
        t.parent.push_back(parent);
        t.birth_lambda.push_back(lambda);
        t.children.emplace_back();
        t.children[parent].push_back(id);
        return id;
    };

    // Each work item is a dendrogram node still carrying the identity of `cluster`.
    std::vector<std::pair<std::size_t, std::size_t>> work{{d.root(), 0}};
    while (!work.empty()) {
        auto [node, cluster] = work.back();
        work.pop_back();
        if (node < d.n_points) {
            t.rows.push_back({cluster, node, kMaxLambda, 1, false});
            t.point_parent[node] = cluster;
            continue;
        }
        const std::size_t i = node - d.n_points;
        const double lambda = lambda_of(d.distance[i]);
        const std::size_t l = d.left[i], r = d.right[i];
        const bool big_l = d.node_size(l) >= min_cluster_size;
        const bool big_r = d.node_size(r) >= min_cluster_size;
        if (big_l && big_r) {
            const std::size_t cl = new_cluster(cluster, lambda);
            const std::size_t cr = new_cluster(cluster, lambda);
            t.rows.push_back({cluster, cl, lambda, d.node_size(l), true});
            t.rows.push_back({cluster, cr, lambda, d.node_size(r), true});
            work.emplace_back(r, cr);
            work.emplace_back(l, cl);
        } else if (big_l) {
            drop_points(r, cluster, lambda);
            work.emplace_back(l, cluster);
        } else if (big_r) {
            drop_points(l, cluster, lambda);
            work.emplace_back(r, cluster);
        } else {
            drop_points(l, cluster, lambda);
            drop_points(r, cluster, lambda);
        }
    }

    t.stability.assign(t.parent.size(), 0.0);
    for (const auto& row : t.rows)
        t.stability[row.parent] += (row.lambda - t.birth_lambda[row.parent]) * static_cast<double>(row.child_size);
    return t;
}

inline std::vector<bool> select_eom(const CondensedTree& t, bool allow_root) {
    const std::size_t m = t.n_clusters();
    std::vector<bool> selected(m, false);
    std::vector<double> best(m, 0.0);
    auto deselect_below = [&](std::size_t c) {
        std::vector<std::size_t> stack(t.children[c].begin(), t.children[c].end());
        while (!stack.empty()) {
            const std::size_t x = stack.back();
            stack.pop_back();
            selected[x] = false;
            stack.insert(stack.end(), t.children[x].begin(), t.children[x].end());
        }
    };
    // Children always carry larger ids than their parent.
    for (std::size_t c = m; c-- > 0;) {
        const bool selectable = c != 0 || allow_root;
        if (t.children[c].empty()) {
            selected[c] = selectable;
            best[c] = selectable ? t.stability[c] : 0.0;
            continue;
        }
        double subtree = 0.0;
        for (std::size_t ch : t.children[c]) subtree += best[ch];
        if (selectable && t.stability[c] >= subtree) {
            selected[c] = true;
            best[c] = t.stability[c];
            deselect_below(c);
        } else {
            best[c] = subtree;
        }
    }
    return selected;
}

inline std::vector<bool> select_leaves(const CondensedTree& t, bool allow_root) {
    std::vector<bool> selected(t.n_clusters(), false);
    for (std::size_t c = 0; c < t.n_clusters(); ++c)
        selected[c] = t.children[c].empty() && (c != 0 || allow_root);
    return selected;
}

// Exactly min(k, achievable) pairwise-disjoint clusters with maximum total
// stability, by knapsack over the condensed tree. Ties prefer the parent.
inline std::vector<bool> select_top_k(const CondensedTree& t, std::size_t k, bool allow_root) {
    const std::size_t m = t.n_clusters();
    constexpr double kNone = -std::numeric_limits<double>::infinity();
    // value[c][j]: best total stability using exactly j clusters inside c's subtree.
    std::vector<std::vector<double>> value(m);
    std::vector<bool> take_self_at_one(m, false);
    // split[c][t][j]: clusters given to child t when the first t+1 children hold j in total.
    std::vector<std::vector<std::vector<std::size_t>>> split(m);
    for (std::size_t c = m; c-- > 0;) {
        std::vector<double> acc{0.0};
        for (std::size_t ci = 0; ci < t.children[c].size(); ++ci) {
            const auto& child = value[t.children[c][ci]];
            const std::size_t cap = std::min(k, acc.size() - 1 + child.size() - 1);
            std::vector<double> next(cap + 1, kNone);
            std::vector<std::size_t> choice(cap + 1, 0);
            for (std::size_t a = 0; a < acc.size(); ++a) {
                if (acc[a] == kNone) continue;
                for (std::size_t b = 0; b < child.size() && a + b <= cap; ++b) {
                    if (child[b] == kNone) continue;
                    if (acc[a] + child[b] > next[a + b]) {
                        next[a + b] = acc[a] + child[b];
                        choice[a + b] = b;
                    }
                }
            }
            acc = std::move(next);
            split[c].push_back(std::move(choice));
        }
        const bool selectable = c != 0 || allow_root;
        if (selectable && k >= 1) {
            if (acc.size() < 2) acc.resize(2, kNone);
            if (t.stability[c] >= acc[1]) {
                acc[1] = t.stability[c];
                take_self_at_one[c] = true;
            }
        }
        value[c] = std::move(acc);
    }

    std::size_t target = 0;
    for (std::size_t j = std::min(k, value[0].size() - 1); j > 0; --j) {
        if (value[0][j] != kNone) {
            target = j;
            break;
        }
    }
    std::vector<bool> selected(m, false);
    std::vector<std::pair<std::size_t, std::size_t>> work{{0, target}};
    while (!work.empty()) {
        auto [c, j] = work.back();
        work.pop_back();
        if (j == 0) continue;
        if (j == 1 && take_self_at_one[c]) {
            selected[c] = true;
            continue;
        }
        for (std::size_t ci = t.children[c].size(); ci-- > 0;) {
            const std::size_t give = split[c][ci][j];
            work.emplace_back(t.children[c][ci], give);
            j -= give;
        }
    }
    return selected;
}

} // namespace detail

/// Density-based hierarchical clustering. Builds the mutual-reachability MST,
/// its single-linkage dendrogram and the condensed tree (splits smaller than
/// `min_cluster_size` become points falling out), then labels every point by
/// the nearest selected cluster among its condensed-tree ancestors; points
/// with none are noise (-1). Output labels follow condensed-tree order.
inline HdbscanResult hdbscan(const std::vector<Point>& points, const HdbscanOptions& opts) {
    if (opts.min_cluster_size < 2) throw Error("min_cluster_size must be at least 2");
    if (points.size() < opts.min_cluster_size)
        throw Error("need at least min_cluster_size (" + std::to_string(opts.min_cluster_size) + ") points, got " +
                    std::to_string(points.size()));
    for (const auto& p : points)
        if (p.size() != points.front().size()) throw Error("mixed point dimensions");
    if (opts.selection == ClusterSelection::top_k && opts.k == 0) throw Error("top-k selection needs k >= 1");

    HdbscanResult result;
    const std::size_t min_samples = opts.min_samples.value_or(opts.min_cluster_size);
    const auto core = core_distances(points, min_samples);
    result.mst = mutual_reachability_mst(points, core);
    const auto dendrogram = detail::single_linkage(points.size(), result.mst);
    result.tree = detail::condense(dendrogram, opts.min_cluster_size);

    std::vector<bool> selected;
    switch (opts.selection) {
    case ClusterSelection::excess_of_mass: selected = detail::select_eom(result.tree, opts.allow_single_cluster); break;
    case ClusterSelection::leaf: selected = detail::select_leaves(result.tree, opts.allow_single_cluster); break;
    case ClusterSelection::top_k: selected = detail::select_top_k(result.tree, opts.k, opts.allow_single_cluster); break;
    }

    std::vector<int> label_of_cluster(result.tree.n_clusters(), -1);
    for (std::size_t c = 0; c < selected.size(); ++c) {
        if (!selected[c]) continue;
        label_of_cluster[c] = static_cast<int>(result.selected.size());
        result.selected.push_back(c);
        result.stabilities.push_back(result.tree.stability[c]);
    }
    result.n_clusters = result.selected.size();
    result.labels.assign(points.size(), -1);
    for (std::size_t p = 0; p < points.size(); ++p) {
        std::size_t c = result.tree.point_parent[p];
        while (true) {
            if (label_of_cluster[c] >= 0) {
                result.labels[p] = label_of_cluster[c];
                break;
            }
            if (c == 0) break;
            c = result.tree.parent[c];
        }
    }
    return result;
}

} // namespace collsum
