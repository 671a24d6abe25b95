#pragma once

#include "collsum/corpus.hpp"
#include "collsum/error.hpp"
#include "collsum/text.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace collsum {

enum class RougeVariant { r1, r2, rl };

inline std::string to_string(RougeVariant v) {
    switch (v) {
    case RougeVariant::r1: return "rouge-1";
    case RougeVariant::r2: return "rouge-2";
    case RougeVariant::rl: return "rouge-l";
    }
    return "?";
}

struct RougeScore {
    RougeVariant variant = RougeVariant::r1;
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
    std::size_t n_candidate = 0; ///< n_c: candidate units (tokens or bigrams)
    std::size_t n_reference = 0; ///< n_r
    std::size_t n_overlap = 0;   ///< n_o, or n_L for ROUGE-L
};

namespace detail {

inline RougeScore make_rouge(RougeVariant v, std::size_t n_c, std::size_t n_r, std::size_t n_o) {
    RougeScore s{v, 0.0, 0.0, 0.0, n_c, n_r, n_o};
    s.recall = n_r ? static_cast<double>(n_o) / static_cast<double>(n_r) : 0.0;
    s.precision = n_c ? static_cast<double>(n_o) / static_cast<double>(n_c) : 0.0;
    s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

inline std::map<std::vector<std::string>, std::size_t> ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
    std::map<std::vector<std::string>, std::size_t> counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
    return counts;
}

inline RougeScore rouge_n(RougeVariant v, const std::vector<std::string>& candidate, const std::vector<std::string>& reference,
                          std::size_t n) {
    const auto cand = ngram_counts(candidate, n), ref = ngram_counts(reference, n);
    std::size_t n_c = 0, n_r = 0, n_o = 0;
    for (const auto& [g, c] : cand) n_c += c;
    for (const auto& [g, c] : ref) {
        n_r += c;
        const auto it = cand.find(g);
        if (it != cand.end()) n_o += std::min(c, it->second);
    }
    return make_rouge(v, n_c, n_r, n_o);
}

} // namespace detail

/// Unigram overlap with clipped counts.
inline RougeScore rouge1(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
    if (reference.empty()) throw Error("ROUGE-1 needs a non-empty reference");
    return detail::rouge_n(RougeVariant::r1, candidate, reference, 1);
}

/// Bigram overlap with clipped counts.
inline RougeScore rouge2(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
    if (reference.size() < 2) throw Error("ROUGE-2 needs a reference of at least two tokens");
    return detail::rouge_n(RougeVariant::r2, candidate, reference, 2);
}

inline std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

/// Longest-common-subsequence recall and precision.
inline RougeScore rougeL(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
    if (reference.empty()) throw Error("ROUGE-L needs a non-empty reference");
    return detail::make_rouge(RougeVariant::rl, candidate.size(), reference.size(), lcs_length(candidate, reference));
}

/// Ground-truth summaries of the cluster's documents, in order, joined by single spaces.
inline std::string concat_ground_truth(const std::vector<Document>& cluster_docs) {
    std::string out;
    for (const auto& d : cluster_docs) {
        if (!d.ground_truth_summary) throw Error("document '" + d.id + "' has no ground-truth summary");
        if (!out.empty()) out += ' ';
        out += *d.ground_truth_summary;
    }
    return out;
}

struct TopicRouge {
    std::string topic;
    RougeScore r1, r2, rl;
};

struct RunScores {
    std::vector<TopicRouge> topics;
    RougeScore mean_r1, mean_r2, mean_rl;
};

/// Scores each topic summary against its reference with the default ROUGE
/// tokenization and averages every variant across topics without weights.
inline RunScores score_run(const std::vector<std::pair<std::string, std::string>>& topic_summaries,
                           const std::vector<std::string>& references) {
    if (topic_summaries.size() != references.size())
        throw Error("got " + std::to_string(topic_summaries.size()) + " summaries for " + std::to_string(references.size()) +
                    " references");
    if (topic_summaries.empty()) throw Error("no topics to score");
    RunScores run;
    for (std::size_t i = 0; i < references.size(); ++i) {
        const auto cand = tokenize(topic_summaries[i].second), ref = tokenize(references[i]);
        run.topics.push_back({topic_summaries[i].first, rouge1(cand, ref), rouge2(cand, ref), rougeL(cand, ref)});
    }
    auto mean = [&run](RougeVariant v, RougeScore TopicRouge::*field) {
        RougeScore m;
        m.variant = v;
        for (const auto& t : run.topics) {
            m.recall += (t.*field).recall;
            m.precision += (t.*field).precision;
            m.f1 += (t.*field).f1;
            m.n_candidate += (t.*field).n_candidate;
            m.n_reference += (t.*field).n_reference;
            m.n_overlap += (t.*field).n_overlap;
        }
        const double n = static_cast<double>(run.topics.size());
        m.recall /= n;
        m.precision /= n;
        m.f1 /= n;
        return m;
    };
    run.mean_r1 = mean(RougeVariant::r1, &TopicRouge::r1);
    run.mean_r2 = mean(RougeVariant::r2, &TopicRouge::r2);
    run.mean_rl = mean(RougeVariant::rl, &TopicRouge::rl);
    return run;
}

namespace detail {

inline std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

} // namespace detail

/// `topic,variant,recall,precision,f1`, one row per topic and variant, then
/// the averages under topic "mean".
inline std::string scores_csv(const RunScores& run) {
    std::string out = "topic,variant,recall,precision,f1\n";
    auto row = [&out](const std::string& topic, const RougeScore& s) {
        out += topic + "," + to_string(s.variant) + "," + detail::fixed(s.recall, 6) + "," + detail::fixed(s.precision, 6) +
               "," + detail::fixed(s.f1, 6) + "\n";
    };
    for (const auto& t : run.topics) {
        row(t.topic, t.r1);
        row(t.topic, t.r2);
        row(t.topic, t.rl);
    }
    row("mean", run.mean_r1);
    row("mean", run.mean_r2);
    row("mean", run.mean_rl);
    return out;
}

/// Text table with one row per system and ROUGE-1 / ROUGE-2 / ROUGE-L columns
/// (F1 x 100), followed by the per-topic recall/precision/F1 breakdown.
inline std::string scores_table(const RunScores& run, const std::string& system = "collsum") {
    char line[256];
    std::string out;
    std::snprintf(line, sizeof line, "%-24s %8s %8s %8s\n", "System", "ROUGE-1", "ROUGE-2", "ROUGE-L");
    out += line;
    std::snprintf(line, sizeof line, "%-24s %8.1f %8.1f %8.1f\n", system.c_str(), 100 * run.mean_r1.f1, 100 * run.mean_r2.f1,
                  100 * run.mean_rl.f1);
    out += line;
    out += "\n";
    std::snprintf(line, sizeof line, "%-12s %-8s %9s %9s %9s\n", "topic", "variant", "recall", "precision", "f1");
    out += line;
    auto row = [&](const std::string& topic, const RougeScore& s) {
        std::snprintf(line, sizeof line, "%-12s %-8s %9.4f %9.4f %9.4f\n", topic.c_str(), to_string(s.variant).c_str(), s.recall,
                      s.precision, s.f1);
        out += line;
    };
    for (const auto& t : run.topics) {
        row(t.topic, t.r1);
        row(t.topic, t.r2);
        row(t.topic, t.rl);
    }
    row("mean", run.mean_r1);
    row("mean", run.mean_r2);
    row("mean", run.mean_rl);
    return out;
}

} // namespace collsum
