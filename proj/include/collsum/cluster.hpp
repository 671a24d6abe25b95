#pragma once

#include "collsum/corpus.hpp"
#include "collsum/error.hpp"
#include "collsum/hdbscan.hpp"
#include "collsum/projection.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace collsum {

inline constexpr int kNoise = -1;

struct ClusterAssignment {
    std::map<std::string, int> labels; ///< doc id -> cluster id or kNoise
    std::size_t n_clusters = 0;
    std::vector<double> stabilities; ///< Indexed by cluster id.

    std::size_t noise_count() const {
        return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](const auto& kv) { return kv.second == kNoise; }));
    }
};

/// Runs HDBSCAN on projected points. Points are processed in id order and
/// clusters renumbered by their smallest member id, so the result does not
/// depend on input order.
inline ClusterAssignment cluster_points(std::vector<ProjectedPoint> points, const HdbscanOptions& opts) {
    std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i].doc_id == points[i - 1].doc_id) throw Error("duplicate point id '" + points[i].doc_id + "'");
    std::vector<Point> coords;
    coords.reserve(points.size());
    for (const auto& p : points) coords.push_back(p.coords);
    const auto raw = hdbscan(coords, opts);

    // First occurrence in id order is the smallest member id.
    std::vector<int> canonical(raw.n_clusters, kNoise);
    int next = 0;
    for (int label : raw.labels)
        if (label != kNoise && canonical[static_cast<std::size_t>(label)] == kNoise) canonical[static_cast<std::size_t>(label)] = next++;

    ClusterAssignment out;
    out.n_clusters = raw.n_clusters;
    out.stabilities.assign(raw.n_clusters, 0.0);
    for (std::size_t c = 0; c < raw.n_clusters; ++c)
        if (canonical[c] != kNoise) out.stabilities[static_cast<std::size_t>(canonical[c])] = raw.stabilities[c];
    for (std::size_t i = 0; i < points.size(); ++i)
        out.labels[points[i].doc_id] = raw.labels[i] == kNoise ? kNoise : canonical[static_cast<std::size_t>(raw.labels[i])];
    return out;
}

enum class NoisePolicy { drop, noise_topic };

inline NoisePolicy parse_noise_policy(std::string_view s) {
    if (s == "drop") return NoisePolicy::drop;
    if (s == "noise-topic") return NoisePolicy::noise_topic;
    throw Error("unknown noise policy '" + std::string(s) + "'");
}

inline std::string to_string(NoisePolicy p) { return p == NoisePolicy::drop ? "drop" : "noise-topic"; }

/// Documents grouped by cluster in corpus order. With `noise_topic`, noise
/// documents form an extra partition under key kNoise.
inline std::map<int, std::vector<Document>> partition_corpus(const Corpus& corpus, const ClusterAssignment& assignment,
                                                             NoisePolicy policy = NoisePolicy::drop) {
    std::map<int, std::vector<Document>> parts;
    for (const auto& doc : corpus) {
        const auto it = assignment.labels.find(doc.id);
        if (it == assignment.labels.end()) throw Error("document '" + doc.id + "' has no cluster label");
        if (it->second == kNoise && policy == NoisePolicy::drop) continue;
        parts[it->second].push_back(doc);
    }
    return parts;
}

inline nlohmann::json to_json(const ClusterAssignment& a) {
    nlohmann::json labels = nlohmann::json::object();
    for (const auto& [id, label] : a.labels) labels[id] = label;
    nlohmann::json stab = nlohmann::json::array();
    for (std::size_t c = 0; c < a.stabilities.size(); ++c) stab.push_back({{"cluster", c}, {"stability", a.stabilities[c]}});
    return {{"labels", labels}, {"n_clusters", a.n_clusters}, {"noise", a.noise_count()}, {"stabilities", stab}};
}

inline ClusterAssignment cluster_assignment_from_json(const nlohmann::json& j) {
    ClusterAssignment a;
    for (const auto& [id, label] : j.at("labels").items()) a.labels[id] = label.get<int>();
    a.n_clusters = j.at("n_clusters").get<std::size_t>();
    a.stabilities.assign(a.n_clusters, 0.0);
    for (const auto& row : j.at("stabilities")) {
        const auto c = row.at("cluster").get<std::size_t>();
        if (c >= a.n_clusters) throw Error("stability row for unknown cluster " + std::to_string(c));
        a.stabilities[c] = row.at("stability").get<double>();
    }
    return a;
}

} // namespace collsum
