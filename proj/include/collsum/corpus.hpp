#pragma once

#include "collsum/error.hpp"
#include "collsum/porter.hpp"
#include "collsum/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace collsum {

struct Document {
    std::string id;
    std::optional<std::string> title;
    std::string text;
    std::optional<std::string> ground_truth_summary;

    friend bool operator==(const Document&, const Document&) = default;
};

/// Ordered, immutable document collection with unique ids and non-empty texts.
class Corpus {
public:
    explicit Corpus(std::vector<Document> documents) : documents_(std::move(documents)) {
        if (documents_.empty()) throw InputError("corpus must contain at least one document");
        std::unordered_set<std::string> seen;
        for (std::size_t i = 0; i < documents_.size(); ++i) {
            auto& doc = documents_[i];
            doc.text = normalize_whitespace(doc.text);
            if (doc.text.empty()) throw InputError("document '" + doc.id + "' has empty text", i + 1);
            if (!seen.insert(doc.id).second) throw InputError("duplicate document id '" + doc.id + "'", i + 1);
        }
    }

    std::size_t size() const noexcept { return documents_.size(); }
    const std::vector<Document>& documents() const noexcept { return documents_; }
    const Document& operator[](std::size_t i) const { return documents_[i]; }
    auto begin() const noexcept { return documents_.begin(); }
    auto end() const noexcept { return documents_.end(); }

    const Document* find(std::string_view id) const {
        auto it = std::find_if(documents_.begin(), documents_.end(), [&](const Document& d) { return d.id == id; });
        return it == documents_.end() ? nullptr : &*it;
    }

    friend bool operator==(const Corpus&, const Corpus&) = default;

private:
    std::vector<Document> documents_;
};

struct Sentence {
    std::string doc_id;
    std::size_t index = 0;
    std::string text;
    std::vector<std::string> tokens;
    std::vector<std::string> stems;

    friend bool operator==(const Sentence&, const Sentence&) = default;
};

/// Builds a Sentence from raw text: default tokenization (lowercase, punctuation
/// stripped, no stopword removal) and one stem per token.
inline Sentence make_sentence(std::string doc_id, std::size_t index, std::string text) {
    Sentence s{std::move(doc_id), index, std::move(text), {}, {}};
    s.tokens = tokenize(s.text);
    s.stems.reserve(s.tokens.size());
    for (const auto& t : s.tokens) s.stems.push_back(stem(t));
    return s;
}

namespace detail {

// Compared against the lowercased word preceding a period, without the period.
inline const std::unordered_set<std::string>& abbreviations() {
    static const std::unordered_set<std::string> words = {
        "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "rev", "gen", "col", "lt", "sgt",
        "capt", "gov", "sen", "rep", "pres", "vs", "etc", "inc", "ltd", "co", "corp", "dept", "univ",
        "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec",
        "vol", "fig", "approx", "e.g", "i.e", "u.s", "u.k", "u.n", "a.i", "d.c", "p.m", "a.m",
    };
    return words;
}

inline bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

inline bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

inline bool starts_capitalized(std::string_view rest) {
    for (char c : rest) {
        if (c == '"' || c == '\'' || c == '(' || c == '[') continue;
        return c >= 'A' && c <= 'Z';
    }
    return false;
}

// The word that ends at position `end` (exclusive), excluding leading punctuation.
inline std::string word_before(std::string_view text, std::size_t end) {
    std::size_t start = end;
    while (start > 0 && !is_space(text[start - 1])) --start;
    std::string_view word = text.substr(start, end - start);
    while (!word.empty() && (word.front() == '"' || word.front() == '(' || word.front() == '\'')) word.remove_prefix(1);
    return to_lower(word);
}

} // namespace detail

/// Rule-based sentence segmentation. A sentence ends at '.', '!' or '?'
/// (optionally followed by closing quotes or brackets) when whitespace and a
/// capitalized word follow, unless the period ends a known abbreviation.
/// A text without terminators yields one sentence.
inline std::vector<Sentence> segment_sentences(const Document& doc) {
    const std::string text = normalize_whitespace(doc.text);
    std::vector<Sentence> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!detail::is_terminator(text[i])) continue;
        std::size_t end = i + 1;
        while (end < text.size() && (detail::is_terminator(text[end]) || detail::is_closer(text[end]))) ++end;
        if (end < text.size() && !detail::is_space(text[end])) continue;
        if (end < text.size() && !detail::starts_capitalized(std::string_view(text).substr(end + 1))) continue;
        if (text[i] == '.' && detail::abbreviations().contains(detail::word_before(text, i))) continue;
        std::string piece = normalize_whitespace(std::string_view(text).substr(start, end - start));
        if (!piece.empty()) out.push_back(make_sentence(doc.id, out.size(), std::move(piece)));
        start = end;
        i = end - 1;
    }
    std::string tail = normalize_whitespace(std::string_view(text).substr(std::min(start, text.size())));
    if (!tail.empty()) out.push_back(make_sentence(doc.id, out.size(), std::move(tail)));
    return out;
}

/// Sentences of several documents in document order, then sentence order.
inline std::vector<Sentence> segment_all(const std::vector<Document>& docs) {
    std::vector<Sentence> out;
    for (const auto& d : docs) {
        auto s = segment_sentences(d);
        out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
    }
    return out;
}

enum class CorpusFormat { jsonl, csv, plain_dir };

inline CorpusFormat parse_corpus_format(std::string_view name) {
    if (name == "jsonl") return CorpusFormat::jsonl;
    if (name == "csv") return CorpusFormat::csv;
    if (name == "plain-dir" || name == "dir") return CorpusFormat::plain_dir;
    throw InputError("unknown corpus format '" + std::string(name) + "' (expected jsonl, csv or plain-dir)");
}

inline std::string to_string(CorpusFormat f) {
    switch (f) {
    case CorpusFormat::jsonl: return "jsonl";
    case CorpusFormat::csv: return "csv";
    case CorpusFormat::plain_dir: return "plain-dir";
    }
    return "?";
}

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::optional<std::string> optional_string(const nlohmann::json& obj, std::initializer_list<const char*> keys) {
    for (const char* key : keys) {
        auto it = obj.find(key);
        if (it != obj.end() && !it->is_null()) {
            if (!it->is_string()) throw InputError(std::string("field '") + key + "' must be a string");
            return it->get<std::string>();
        }
    }
    return std::nullopt;
}

inline std::string json_id(const nlohmann::json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_integer()) return std::to_string(value.get<long long>());
    throw InputError("field 'id' must be a string or integer");
}

inline std::vector<Document> load_jsonl(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<Document> docs;
    std::string line;
    std::size_t record = 0;
    while (std::getline(in, line)) {
        ++record;
        if (normalize_whitespace(line).empty()) continue;
        try {
            const auto obj = nlohmann::json::parse(line);
            if (!obj.is_object()) throw InputError("record is not a JSON object");
            Document d;
            auto id = obj.find("id");
            if (id == obj.end()) throw InputError("record has no 'id'");
            d.id = json_id(*id);
            auto text = optional_string(obj, {"text", "article", "document"});
            if (!text || normalize_whitespace(*text).empty()) throw InputError("record has empty text");
            d.text = *text;
            d.title = optional_string(obj, {"title"});
            d.ground_truth_summary = optional_string(obj, {"summary", "highlights"});
            docs.push_back(std::move(d));
        } catch (const nlohmann::json::exception& e) {
            throw InputError(std::string("malformed record: ") + e.what(), record);
        } catch (const InputError& e) {
            if (e.location()) throw;
            throw InputError(e.what(), record);
        }
    }
    return docs;
}

// RFC 4180 fields: quoted fields may contain commas, doubled quotes and newlines.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view data) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool row_has_content = false;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const char c = data[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < data.size() && data[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            row_has_content = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            row_has_content = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < data.size() && data[i + 1] == '\n') ++i;
            if (row_has_content || !field.empty()) {
                row.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            row.clear();
            field.clear();
            row_has_content = false;
        } else {
            field.push_back(c);
            row_has_content = true;
        }
    }
    if (quoted) throw InputError("unterminated quoted field", rows.size() + 1);
    if (row_has_content || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<Document> load_csv(const std::filesystem::path& path) {
    const auto rows = parse_csv(read_file(path));
    if (rows.empty()) throw InputError("CSV file has no header");
    const auto& header = rows.front();
    auto column = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (normalize_whitespace(header[i]) == name) return i;
        return std::nullopt;
    };
    const auto id_col = column("id");
    const auto text_col = column("text");
    const auto summary_col = column("summary");
    if (!id_col || !text_col) throw InputError("CSV header must contain 'id' and 'text'", 1);
    std::vector<Document> docs;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size())
            throw InputError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(row.size()), r);
        if (normalize_whitespace(row[*text_col]).empty()) throw InputError("record has empty text", r);
        Document d;
        d.id = row[*id_col];
        d.text = row[*text_col];
        if (summary_col && !row[*summary_col].empty()) d.ground_truth_summary = row[*summary_col];
        docs.push_back(std::move(d));
    }
    return docs;
}

inline std::vector<Document> load_plain_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw InputError("'" + dir.string() + "' is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<Document> docs;
    for (std::size_t i = 0; i < files.size(); ++i) {
        Document d;
        d.id = files[i].stem().string();
        d.text = read_file(files[i]);
        if (normalize_whitespace(d.text).empty()) throw InputError("file '" + files[i].filename().string() + "' is empty", i + 1);
        docs.push_back(std::move(d));
    }
    return docs;
}

} // namespace detail

/// Reads a document collection. Record numbers in errors are 1-based lines
/// (jsonl), data rows (csv) or sorted file positions (plain-dir).
inline Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    if (!std::filesystem::exists(path)) throw InputError("path '" + path.string() + "' does not exist");
    std::vector<Document> docs;
    switch (format) {
    case CorpusFormat::jsonl: docs = detail::load_jsonl(path); break;
    case CorpusFormat::csv: docs = detail::load_csv(path); break;
    case CorpusFormat::plain_dir: docs = detail::load_plain_dir(path); break;
    }
    return Corpus(std::move(docs));
}

} // namespace collsum
