#pragma once

#include "collsum/corpus.hpp"
#include "collsum/error.hpp"
#include "collsum/porter.hpp"
#include "collsum/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace collsum {

struct LdaOptions {
    std::size_t n_topics = 10;
    std::optional<double> alpha; ///< Defaults to 50 / n_topics.
    double beta = 0.01;
    std::size_t iterations = 500;
    std::uint64_t seed = 0;
};

struct TopicModel {
    std::size_t n_topics = 0;
    std::vector<std::string> vocab;              ///< Sorted stemmed terms.
    std::vector<std::vector<double>> phi;        ///< n_topics x V
    std::vector<std::vector<double>> theta;      ///< docs x n_topics
    std::vector<std::string> doc_ids;
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
};

/// LDA input terms: default tokenization with English stopwords removed,
/// tokens without a letter or shorter than two bytes dropped, then stemmed.
inline std::vector<std::string> lda_terms(std::string_view text) {
    TokenizeOptions opts;
    opts.stopwords = &english_stopwords();
    std::vector<std::string> out;
    for (auto& tok : tokenize(text, opts)) {
        if (tok.size() < 2) continue;
        if (std::none_of(tok.begin(), tok.end(), [](char c) { return c >= 'a' && c <= 'z'; })) continue;
        std::string s = stem(tok);
        if (!english_stopwords().contains(s)) out.push_back(std::move(s));
    }
    return out;
}

/// Collapsed Gibbs sampling over pre-tokenized documents. A fixed seed gives
/// bitwise-identical phi and theta.
inline TopicModel fit_lda_terms(const std::vector<std::string>& doc_ids, const std::vector<std::vector<std::string>>& docs,
                                const LdaOptions& opts) {
    if (opts.n_topics == 0) throw Error("n_topics must be at least 1");
    if (docs.size() != doc_ids.size()) throw Error("document id count does not match document count");
    if (opts.beta <= 0.0) throw Error("beta must be positive");
    const double alpha = opts.alpha.value_or(50.0 / static_cast<double>(opts.n_topics));
    if (alpha <= 0.0) throw Error("alpha must be positive");

    TopicModel m;
    m.n_topics = opts.n_topics;
    m.doc_ids = doc_ids;
    m.alpha = alpha;
    m.beta = opts.beta;
    m.iterations = opts.iterations;
    m.seed = opts.seed;
    for (const auto& d : docs) m.vocab.insert(m.vocab.end(), d.begin(), d.end());
    std::sort(m.vocab.begin(), m.vocab.end());
    m.vocab.erase(std::unique(m.vocab.begin(), m.vocab.end()), m.vocab.end());
    if (m.vocab.empty()) throw Error("empty vocabulary: no document has a usable term");

    const std::size_t K = opts.n_topics, V = m.vocab.size(), D = docs.size();
    std::vector<std::vector<std::size_t>> words(D);
    for (std::size_t d = 0; d < D; ++d)
        for (const auto& t : docs[d])
            words[d].push_back(static_cast<std::size_t>(std::lower_bound(m.vocab.begin(), m.vocab.end(), t) - m.vocab.begin()));

    std::mt19937_64 rng(opts.seed);
    auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    std::vector<std::vector<std::size_t>> z(D);
    std::vector<std::vector<std::uint32_t>> n_dk(D, std::vector<std::uint32_t>(K, 0));
    std::vector<std::vector<std::uint32_t>> n_kw(K, std::vector<std::uint32_t>(V, 0));
    std::vector<std::uint64_t> n_k(K, 0);
    for (std::size_t d = 0; d < D; ++d) {
        z[d].resize(words[d].size());
        for (std::size_t i = 0; i < words[d].size(); ++i) {
            const std::size_t k = static_cast<std::size_t>(rng() % K);
            z[d][i] = k;
            ++n_dk[d][k];
            ++n_kw[k][words[d][i]];
            ++n_k[k];
        }
    }

    const double v_beta = static_cast<double>(V) * opts.beta;
    std::vector<double> cumulative(K);
    for (std::size_t it = 0; it < opts.iterations; ++it) {
        for (std::size_t d = 0; d < D; ++d) {
            for (std::size_t i = 0; i < words[d].size(); ++i) {
                const std::size_t w = words[d][i];
                std::size_t k = z[d][i];
                --n_dk[d][k];
                --n_kw[k][w];
                --n_k[k];
                double total = 0.0;
                for (std::size_t j = 0; j < K; ++j) {
                    total += (n_dk[d][j] + alpha) * (n_kw[j][w] + opts.beta) / (static_cast<double>(n_k[j]) + v_beta);
                    cumulative[j] = total;
                }
                const double r = uniform() * total;
                k = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin());
                k = std::min(k, K - 1);
                z[d][i] = k;
                ++n_dk[d][k];
                ++n_kw[k][w];
                ++n_k[k];
            }
        }
    }

    m.phi.assign(K, std::vector<double>(V));
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t w = 0; w < V; ++w) m.phi[k][w] = (n_kw[k][w] + opts.beta) / (static_cast<double>(n_k[k]) + v_beta);
    m.theta.assign(D, std::vector<double>(K));
    for (std::size_t d = 0; d < D; ++d)
        for (std::size_t k = 0; k < K; ++k)
            m.theta[d][k] = (n_dk[d][k] + alpha) / (static_cast<double>(words[d].size()) + static_cast<double>(K) * alpha);
    return m;
}

inline TopicModel fit_lda(const std::vector<Document>& docs, const LdaOptions& opts) {
    std::vector<std::string> ids;
    std::vector<std::vector<std::string>> terms;
    for (const auto& d : docs) {
        ids.push_back(d.id);
        terms.push_back(lda_terms(d.text));
    }
    return fit_lda_terms(ids, terms, opts);
}

struct TermWeight {
    std::string term;
    double weight = 0.0;
    friend bool operator==(const TermWeight&, const TermWeight&) = default;
};

/// Per topic, terms by descending phi (ties in vocabulary order), cut to
/// `t` terms, and with `epsilon` also to terms whose weight is at least epsilon.
inline std::vector<std::vector<TermWeight>> top_terms(const TopicModel& model, std::size_t t,
                                                      std::optional<double> epsilon = {}) {
    if (t == 0) throw Error("t must be at least 1");
    std::vector<std::vector<TermWeight>> out;
    for (const auto& row : model.phi) {
        std::vector<std::size_t> order(row.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&row](std::size_t a, std::size_t b) { return row[a] > row[b]; });
        std::vector<TermWeight> terms;
        for (std::size_t i : order) {
            if (terms.size() >= t) break;
            if (epsilon && row[i] < *epsilon) break;
            terms.push_back({model.vocab[i], row[i]});
        }
        out.push_back(std::move(terms));
    }
    return out;
}

inline nlohmann::json to_json(const TopicModel& m) {
    return {{"n_topics", m.n_topics}, {"alpha", m.alpha}, {"beta", m.beta}, {"iterations", m.iterations},
            {"seed", m.seed}, {"vocab", m.vocab}, {"doc_ids", m.doc_ids}, {"phi", m.phi}, {"theta", m.theta}};
}

inline TopicModel topic_model_from_json(const nlohmann::json& j) {
    TopicModel m;
    m.n_topics = j.at("n_topics").get<std::size_t>();
    m.alpha = j.at("alpha").get<double>();
    m.beta = j.at("beta").get<double>();
    m.iterations = j.at("iterations").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.vocab = j.at("vocab").get<std::vector<std::string>>();
    m.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
    m.phi = j.at("phi").get<std::vector<std::vector<double>>>();
    m.theta = j.at("theta").get<std::vector<std::vector<double>>>();
    return m;
}

} // namespace collsum
