#pragma once

#include "collsum/embed.hpp"
#include "collsum/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace collsum {

struct ProjectedPoint {
    std::string doc_id;
    std::vector<double> coords;
    friend bool operator==(const ProjectedPoint&, const ProjectedPoint&) = default;
};

enum class ProjectionMethod { pca, neighbor_embedding };

inline ProjectionMethod parse_projection_method(std::string_view s) {
    if (s == "pca") return ProjectionMethod::pca;
    if (s == "neighbor-embedding" || s == "umap") return ProjectionMethod::neighbor_embedding;
    throw Error("unknown projection method '" + std::string(s) + "'");
}

inline std::string to_string(ProjectionMethod m) { return m == ProjectionMethod::pca ? "pca" : "neighbor-embedding"; }

struct ProjectionOptions {
    ProjectionMethod method = ProjectionMethod::pca;
    std::size_t target_dim = 5;
    std::uint64_t seed = 0;
    // neighbor-embedding only
    std::size_t n_neighbors = 15;
    std::size_t epochs = 300;
    double min_dist = 0.1;
    std::size_t negative_samples = 5;
};

namespace detail {

inline Eigen::MatrixXd to_matrix(const std::vector<EmbeddingVector>& vectors) {
    const auto n = static_cast<Eigen::Index>(vectors.size());
    const auto d = static_cast<Eigen::Index>(vectors.front().dim());
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& v = vectors[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(v.dim()) != d) throw Error("mixed dimensions in projection input");
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = v.values[static_cast<std::size_t>(j)];
    }
    return x;
}

// Exact principal components via SVD of the centred data. Each component's
// sign is fixed so that its first nonzero loading is positive.
inline Eigen::MatrixXd pca_coords(const Eigen::MatrixXd& x, std::size_t k) {
    const Eigen::MatrixXd centred = x.rowwise() - x.colwise().mean();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinV);
    Eigen::MatrixXd v = svd.matrixV().leftCols(static_cast<Eigen::Index>(k));
    if (v.cols() < static_cast<Eigen::Index>(k)) {
        // Fewer singular vectors than requested (n - 1 < k): pad with zeros.
        Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(x.cols(), static_cast<Eigen::Index>(k));
        padded.leftCols(v.cols()) = v;
        v = padded;
    }
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        for (Eigen::Index r = 0; r < v.rows(); ++r) {
            if (std::abs(v(r, c)) > 1e-12) {
                if (v(r, c) < 0) v.col(c) *= -1.0;
                break;
            }
        }
    }
    return centred * v;
}

// Parameters of the low-dimensional membership curve 1 / (1 + a d^(2b)),
// least-squares fitted to the offset exponential exp(-(d - min_dist)) used by UMAP.
inline std::pair<double, double> fit_ab(double min_dist, double spread = 1.0) {
    std::vector<double> xs, ys;
    for (int i = 1; i <= 300; ++i) {
        const double d = spread * 3.0 * i / 300.0;
        xs.push_back(d);
        ys.push_back(d < min_dist ? 1.0 : std::exp(-(d - min_dist) / spread));
    }
    double a = 1.0, b = 1.0;
    // Gauss-Newton on (a, b).
    for (int iter = 0; iter < 200; ++iter) {
        Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
        Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double x2b = std::pow(xs[i], 2.0 * b);
            const double f = 1.0 / (1.0 + a * x2b);
            const double r = f - ys[i];
            const double df_da = -x2b * f * f;
            const double df_db = -a * x2b * 2.0 * std::log(xs[i]) * f * f;
            Eigen::Vector2d g(df_da, df_db);
            jtj += g * g.transpose();
            jtr += g * r;
        }
        const Eigen::Vector2d step = jtj.ldlt().solve(jtr);
        a -= step(0);
        b -= step(1);
        a = std::max(a, 1e-3);
        b = std::max(b, 1e-3);
        if (step.norm() < 1e-10) break;
    }
    return {a, b};
}

struct WeightedEdge {
    std::size_t head;
    std::size_t tail;
    double weight;
};

// Fuzzy k-NN graph: per-point smooth-kNN bandwidths, then probabilistic union.
inline std::vector<WeightedEdge> fuzzy_graph(const Eigen::MatrixXd& x, std::size_t k) {
    const std::size_t n = static_cast<std::size_t>(x.rows());
    std::vector<std::vector<std::pair<double, std::size_t>>> knn(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> all;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) all.emplace_back((x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).norm(), j);
        std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
        all.resize(k);
        knn[i] = std::move(all);
    }
    const double target = std::log2(static_cast<double>(k));
    std::vector<std::vector<double>> membership(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const double rho = knn[i].front().first;
        double lo = 0.0, hi = std::numeric_limits<double>::infinity(), sigma = 1.0;
        for (int iter = 0; iter < 64; ++iter) {
            double psum = 0.0;
            for (const auto& [d, j] : knn[i]) psum += std::exp(-std::max(0.0, d - rho) / sigma);
            if (std::abs(psum - target) < 1e-5) break;
            if (psum > target) {
                hi = sigma;
                sigma = (lo + hi) / 2.0;
            } else {
                lo = sigma;
                sigma = std::isinf(hi) ? sigma * 2.0 : (lo + hi) / 2.0;
            }
        }
        sigma = std::max(sigma, 1e-3);
        for (const auto& [d, j] : knn[i]) membership[i][j] = std::exp(-std::max(0.0, d - rho) / sigma);
    }
    std::vector<WeightedEdge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double a = membership[i][j], b = membership[j][i];
            const double w = a + b - a * b;
            if (w > 0.0) edges.push_back({i, j, w});
        }
    }
    return edges;
}

// Seeded stochastic layout with attractive updates along graph edges and
// negative sampling for repulsion. Edges are sampled proportionally to weight.
inline Eigen::MatrixXd neighbor_embedding(const Eigen::MatrixXd& x, const ProjectionOptions& opts) {
    const std::size_t n = static_cast<std::size_t>(x.rows());
    const std::size_t k = std::clamp<std::size_t>(opts.n_neighbors, 1, n - 1);
    const auto edges = fuzzy_graph(x, k);
    const auto [a, b] = fit_ab(opts.min_dist);

    Eigen::MatrixXd y = pca_coords(x, opts.target_dim);
    const double extent = y.cwiseAbs().maxCoeff();
    if (extent > 0.0) y *= 10.0 / extent;

    std::mt19937_64 rng(opts.seed);
    double max_w = 0.0;
    for (const auto& e : edges) max_w = std::max(max_w, e.weight);
    std::vector<double> epochs_per_sample, next_sample;
    for (const auto& e : edges) {
        epochs_per_sample.push_back(max_w / e.weight);
        next_sample.push_back(max_w / e.weight);
    }
    const std::size_t dim = opts.target_dim;
    auto clip = [](double g) { return std::clamp(g, -4.0, 4.0); };
    for (std::size_t epoch = 1; epoch <= opts.epochs; ++epoch) {
        const double alpha = 1.0 - static_cast<double>(epoch - 1) / static_cast<double>(opts.epochs);
        for (std::size_t e = 0; e < edges.size(); ++e) {
            if (next_sample[e] > static_cast<double>(epoch)) continue;
            next_sample[e] += epochs_per_sample[e];
            for (int dir = 0; dir < 2; ++dir) {
                const std::size_t i = dir == 0 ? edges[e].head : edges[e].tail;
                const std::size_t j = dir == 0 ? edges[e].tail : edges[e].head;
                double d2 = 0.0;
                for (std::size_t c = 0; c < dim; ++c) {
                    const double diff = y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) -
                                        y(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c));
                    d2 += diff * diff;
                }
                if (d2 > 0.0) {
                    const double coeff = -2.0 * a * b * std::pow(d2, b - 1.0) / (a * std::pow(d2, b) + 1.0);
                    for (std::size_t c = 0; c < dim; ++c) {
                        const auto ci = static_cast<Eigen::Index>(c);
                        const double g = clip(coeff * (y(static_cast<Eigen::Index>(i), ci) - y(static_cast<Eigen::Index>(j), ci)));
                        y(static_cast<Eigen::Index>(i), ci) += alpha * g;
                    }
                }
                for (std::size_t s = 0; s < opts.negative_samples; ++s) {
                    const std::size_t m = static_cast<std::size_t>(rng() % n);
                    if (m == i) continue;
                    double dn = 0.0;
                    for (std::size_t c = 0; c < dim; ++c) {
                        const double diff = y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) -
                                            y(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(c));
                        dn += diff * diff;
                    }
                    const double coeff = 2.0 * b / ((0.001 + dn) * (a * std::pow(dn, b) + 1.0));
                    for (std::size_t c = 0; c < dim; ++c) {
                        const auto ci = static_cast<Eigen::Index>(c);
                        const double g = dn > 0.0 ? clip(coeff * (y(static_cast<Eigen::Index>(i), ci) - y(static_cast<Eigen::Index>(m), ci))) : 4.0;
                        y(static_cast<Eigen::Index>(i), ci) += alpha * g;
                    }
                }
            }
        }
    }
    return y;
}

} // namespace detail

/// Projects embeddings to `opts.target_dim` dimensions. Deterministic for a
/// fixed seed. Requires at least target_dim + 1 vectors and target_dim below
/// the input dimension.
inline std::vector<ProjectedPoint> project(const std::vector<EmbeddingVector>& vectors, const std::vector<std::string>& ids,
                                           const ProjectionOptions& opts) {
    if (vectors.size() != ids.size()) throw Error("projection needs one id per vector");
    if (opts.target_dim == 0) throw Error("target_dim must be positive");
    if (vectors.size() < opts.target_dim + 1)
        throw Error("projection to " + std::to_string(opts.target_dim) + " dimensions needs at least " +
                    std::to_string(opts.target_dim + 1) + " vectors, got " + std::to_string(vectors.size()));
    if (opts.target_dim >= vectors.front().dim())
        throw Error("target_dim " + std::to_string(opts.target_dim) + " must be below the input dimension " +
                    std::to_string(vectors.front().dim()));
    for (const auto& v : vectors) require_finite(v);
    const Eigen::MatrixXd x = detail::to_matrix(vectors);
    const Eigen::MatrixXd y = opts.method == ProjectionMethod::pca ? detail::pca_coords(x, opts.target_dim)
                                                                   : detail::neighbor_embedding(x, opts);
    std::vector<ProjectedPoint> out;
    out.reserve(vectors.size());
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        ProjectedPoint p{ids[static_cast<std::size_t>(i)], std::vector<double>(static_cast<std::size_t>(y.cols()))};
        for (Eigen::Index c = 0; c < y.cols(); ++c) p.coords[static_cast<std::size_t>(c)] = y(i, c);
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace collsum
