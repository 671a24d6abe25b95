#pragma once

#include "collsum/corpus.hpp"
#include "collsum/error.hpp"
#include "collsum/lda.hpp"
#include "collsum/porter.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

namespace collsum {

/// Synonyms keyed by stemmed term. Keys that stem alike share one entry,
/// which also lists the keys themselves.
class SynonymLexicon {
public:
    void add(std::string_view term, const std::vector<std::string>& synonyms) {
        auto& entry = entries_[stem(to_lower(term))];
        entry.insert(to_lower(term));
        for (const auto& s : synonyms)
            if (!s.empty()) entry.insert(s);
    }

    /// Surface synonyms of the stemmed `term`; null when absent.
    const std::set<std::string>* find(std::string_view stemmed) const {
        const auto it = entries_.find(std::string(stemmed));
        return it == entries_.end() ? nullptr : &it->second;
    }

    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::map<std::string, std::set<std::string>> entries_;
};

/// Reads `term<TAB>syn1,syn2,...` lines; blank lines and lines starting with
/// '#' are skipped.
inline SynonymLexicon load_synonym_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read synonym lexicon " + path.string());
    SynonymLexicon lex;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) throw InputError("malformed synonym line in " + path.string(), line_no);
        std::vector<std::string> syns;
        std::string_view rest = std::string_view(line).substr(tab + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            syns.emplace_back(normalize_whitespace(rest.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        lex.add(line.substr(0, tab), syns);
    }
    return lex;
}

struct TermExpansion {
    std::set<std::string> stems;   ///< Matching forms; includes the representative term.
    std::set<std::string> surface; ///< Lexicon words of the term's entry; the term alone when it has none.
    friend bool operator==(const TermExpansion&, const TermExpansion&) = default;
};

struct TopicTermSet {
    int cluster_id = 0;
    std::map<std::string, TermExpansion> entries;

    bool degenerate() const noexcept { return entries.empty(); }

    std::unordered_set<std::string> all_stems() const {
        std::unordered_set<std::string> out;
        for (const auto& [term, e] : entries) out.insert(e.stems.begin(), e.stems.end());
        return out;
    }
};

/// Representative terms are those present in at least `freq_threshold` of
/// the per-topic lists (capped at the number of lists so a single-topic
/// model still yields terms); each is expanded with its lexicon synonyms.
inline TopicTermSet build_topic_term_set(int cluster_id, const std::vector<std::vector<TermWeight>>& lists,
                                         std::size_t freq_threshold, const SynonymLexicon& lexicon) {
    std::map<std::string, std::size_t> counts;
    for (const auto& list : lists) {
        std::set<std::string> seen;
        for (const auto& tw : list)
            if (seen.insert(tw.term).second) ++counts[tw.term];
    }
    const std::size_t needed = std::max<std::size_t>(1, std::min(freq_threshold, lists.size()));
    TopicTermSet set;
    set.cluster_id = cluster_id;
    for (const auto& [term, n] : counts) {
        if (n < needed) continue;
        TermExpansion e;
        e.stems.insert(term);
        if (const auto* syns = lexicon.find(term)) {
            for (const auto& s : *syns) {
                e.surface.insert(s);
                e.stems.insert(stem(to_lower(s)));
            }
        }
        if (e.surface.empty()) e.surface.insert(term);
        set.entries.emplace(term, std::move(e));
    }
    return set;
}

inline TopicTermSet build_topic_term_set(int cluster_id, const TopicModel& model, std::size_t t, std::optional<double> epsilon,
                                         std::size_t freq_threshold, const SynonymLexicon& lexicon) {
    return build_topic_term_set(cluster_id, top_terms(model, t, epsilon), freq_threshold, lexicon);
}

struct TopicSentences {
    int cluster_id = 0;
    std::vector<Sentence> sentences;
};

/// Sentences of the cluster's documents (document order, then sentence
/// order) whose stems meet the term set.
inline TopicSentences extract_topic_sentences(int cluster_id, const std::vector<Document>& cluster_docs,
                                              const TopicTermSet& terms) {
    TopicSentences out;
    out.cluster_id = cluster_id;
    const auto stems = terms.all_stems();
    if (stems.empty()) return out;
    for (const auto& doc : cluster_docs)
        for (auto& s : segment_sentences(doc))
            if (std::any_of(s.stems.begin(), s.stems.end(), [&stems](const std::string& x) { return stems.contains(x); }))
                out.sentences.push_back(std::move(s));
    return out;
}

inline nlohmann::json to_json(const TopicTermSet& s) {
    nlohmann::json entries = nlohmann::json::object();
    for (const auto& [term, e] : s.entries) entries[term] = {{"stems", e.stems}, {"synonyms", e.surface}};
    return {{"cluster_id", s.cluster_id}, {"degenerate", s.degenerate()}, {"entries", entries}};
}

inline nlohmann::json to_json(const Sentence& s) {
    return {{"doc_id", s.doc_id}, {"index", s.index}, {"text", s.text}};
}

inline nlohmann::json to_json(const TopicSentences& ts) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& s : ts.sentences) list.push_back(to_json(s));
    return {{"cluster_id", ts.cluster_id}, {"sentences", list}};
}

inline TopicSentences topic_sentences_from_json(const nlohmann::json& j) {
    TopicSentences ts;
    ts.cluster_id = j.at("cluster_id").get<int>();
    for (const auto& s : j.at("sentences"))
        ts.sentences.push_back(make_sentence(s.at("doc_id").get<std::string>(), s.at("index").get<std::size_t>(),
                                             s.at("text").get<std::string>()));
    return ts;
}

} // namespace collsum
