#include "collsum/rouge.hpp"
#include "collsum/sentiment.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace collsum;

namespace {

SentimentLexicon fixture_lexicon() {
    SentimentLexicon lex;
    lex.add("happy", {8.0, 6.0});
    lex.add("sad", {2.0, 4.0});
    lex.add("calm", {6.0, 2.0});
    lex.add("war", {1.0, 8.0});
    lex.add("good", {7.0, 5.0});
    lex.add("bad", {3.0, 5.0});
    return lex;
}

TopicSentences fixture_topic(const std::vector<std::string>& texts) {
    TopicSentences ts;
    for (std::size_t i = 0; i < texts.size(); ++i) ts.sentences.push_back(make_sentence("d", i, texts[i]));
    return ts;
}

SemanticChunk span(std::size_t start, std::size_t end) {
    SemanticChunk c;
    c.start = start;
    c.end = end;
    return c;
}

std::vector<std::string> toks(const char* s) { return tokenize(s); }

// Exponential oracle: longest common subsequence over every subset of `a`.
std::size_t lcs_oracle(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::size_t best = 0;
    for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
        std::size_t j = 0, len = 0;
        bool ok = true;
        for (std::size_t i = 0; i < a.size() && ok; ++i) {
            if (!(mask & (1u << i))) continue;
            while (j < b.size() && b[j] != a[i]) ++j;
            if (j == b.size()) ok = false;
            else {
                ++j;
                ++len;
            }
        }
        if (ok) best = std::max(best, len);
    }
    return best;
}

} // namespace

TEST(Sentiment, NormalizationEndpoints) {
    EXPECT_EQ(normalize_valence(1.0), -1.0);
    EXPECT_EQ(normalize_valence(5.0), 0.0);
    EXPECT_EQ(normalize_valence(9.0), 1.0);
    EXPECT_EQ(normalize_arousal(1.0), 0.0);
    EXPECT_EQ(normalize_arousal(9.0), 1.0);
}

TEST(Sentiment, SentenceScoreIsMeanOfMatches) {
    const auto lex = fixture_lexicon();
    const auto s = score_text("A sad and calm evening", lex);
    EXPECT_EQ(s.matched_terms, 2u);
    EXPECT_EQ(s.tokens, 5u);
    EXPECT_DOUBLE_EQ(s.valence, -0.25);
    EXPECT_DOUBLE_EQ(s.arousal, 0.25);
    EXPECT_DOUBLE_EQ(s.coverage, 0.4);
    const auto none = score_text("Nothing matched here", lex);
    EXPECT_EQ(none.valence, 0.0);
    EXPECT_EQ(none.arousal, 0.0);
    EXPECT_EQ(none.matched_terms, 0u);
    EXPECT_EQ(score_text("HAPPY", lex).matched_terms, 1u);
}

TEST(Sentiment, OppositeSentencesCancel) {
    const auto lex = fixture_lexicon();
    const auto ts = fixture_topic({"A good day.", "A bad day."});
    const auto h = score_hierarchy(ts, {span(0, 1)}, "", lex);
    EXPECT_DOUBLE_EQ(h.chunks[0].sentences[0].valence, 0.5);
    EXPECT_DOUBLE_EQ(h.chunks[0].sentences[1].valence, -0.5);
    EXPECT_LT(std::fabs(h.chunks[0].score.valence), 1e-12);

    std::vector<SentimentScore> mixed(3);
    mixed[0].valence = 0.9;
    mixed[1].valence = 0.1;
    mixed[2].valence = -0.2;
    EXPECT_NEAR(aggregate(mixed).valence, 0.8 / 3.0, 1e-12);
}

TEST(Sentiment, HierarchyMatchesHandOracle) {
    const auto lex = fixture_lexicon();
    const auto ts = fixture_topic({"The happy child smiled.", "A sad and calm evening.", "War came.", "Nothing matched here."});
    const std::vector<SemanticChunk> chunks{span(0, 1), span(2, 3)};

    const auto h = score_hierarchy(ts, chunks, "A happy war.", lex);
    ASSERT_EQ(h.chunks.size(), 2u);
    EXPECT_DOUBLE_EQ(h.chunks[0].sentences[0].valence, 0.75);
    EXPECT_DOUBLE_EQ(h.chunks[0].sentences[0].arousal, 0.625);
    EXPECT_DOUBLE_EQ(h.chunks[1].sentences[0].valence, -1.0);
    EXPECT_DOUBLE_EQ(h.chunks[1].sentences[0].arousal, 0.875);
    EXPECT_DOUBLE_EQ(h.chunks[0].score.valence, 0.25);
    EXPECT_DOUBLE_EQ(h.chunks[0].score.arousal, 0.4375);
    EXPECT_DOUBLE_EQ(h.chunks[1].score.valence, -0.5);
    EXPECT_DOUBLE_EQ(h.chunks[1].score.arousal, 0.4375);
    // Topic score comes from the summary text: happy (8, 6) and war (1, 8).
    EXPECT_DOUBLE_EQ(h.topic.valence, normalize_valence(4.5));
    EXPECT_DOUBLE_EQ(h.topic.arousal, normalize_arousal(7.0));

    const auto w = score_hierarchy(ts, chunks, "", lex, AggregateWeights::token_weighted);
    EXPECT_NEAR(w.chunks[0].score.valence, (4 * 0.75 + 5 * -0.25) / 9.0, 1e-15);
    EXPECT_NEAR(w.chunks[1].score.valence, (2 * -1.0 + 3 * 0.0) / 5.0, 1e-15);

    EXPECT_THROW(score_hierarchy(ts, {span(0, 1)}, "", lex), Error);
    EXPECT_THROW(score_hierarchy(ts, {span(0, 1), span(3, 3)}, "", lex), Error);

    const auto back = sentiment_hierarchy_from_json(nlohmann::json::parse(to_json(h).dump()));
    EXPECT_EQ(back.chunks[1].sentences[0], h.chunks[1].sentences[0]);
    EXPECT_EQ(back.topic, h.topic);
}

TEST(Sentiment, LexiconFileDuplicatesAndErrors) {
    testutil::TempDir dir;
    testutil::write_file(dir / "lex.tsv", "# demo\nhappy\t8\t6\n\nsad\t2\t4\nhappy\t7.5\t5\n");
    std::vector<std::string> warnings;
    const auto lex = load_lexicon(dir / "lex.tsv", [&](const std::string& m) { warnings.push_back(m); });
    EXPECT_EQ(lex.size(), 2u);
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_NE(warnings[0].find("line 5"), std::string::npos);
    EXPECT_EQ(lex.find(stem("happy"))->valence, 7.5);

    testutil::write_file(dir / "range.tsv", "happy\t8\t6\nangry\t10\t5\n");
    try {
        load_lexicon(dir / "range.tsv");
        FAIL();
    } catch (const InputError& e) {
        EXPECT_EQ(e.location(), 2u);
    }
    testutil::write_file(dir / "shape.tsv", "happy 8 6\n");
    EXPECT_THROW(load_lexicon(dir / "shape.tsv"), InputError);
    testutil::write_file(dir / "num.tsv", "happy\t8x\t6\n");
    EXPECT_THROW(load_lexicon(dir / "num.tsv"), InputError);
    EXPECT_THROW(load_lexicon(dir / "missing.tsv"), InputError);
}

TEST(Sentiment, DemoLexiconLoads) {
    const auto lex = load_lexicon(std::filesystem::path(COLLSUM_DATA_DIR) / "sentiment_demo.tsv");
    EXPECT_GT(lex.size(), 100u);
}

TEST(Rouge, WorkedExamples) {
    const auto r1 = rouge1(toks("John loves data science."), toks("John really loves data science"));
    EXPECT_EQ(r1.n_reference, 5u);
    EXPECT_EQ(r1.n_candidate, 4u);
    EXPECT_EQ(r1.n_overlap, 4u);
    EXPECT_NEAR(r1.recall, 0.8, 1e-9);
    EXPECT_NEAR(r1.precision, 1.0, 1e-9);

    const auto r2 = rouge2(toks("John loves data science."), toks("John really loves data science"));
    EXPECT_EQ(r2.n_reference, 4u);
    EXPECT_EQ(r2.n_candidate, 3u);
    EXPECT_EQ(r2.n_overlap, 2u);
    EXPECT_NEAR(r2.recall, 0.5, 1e-9);
    EXPECT_NEAR(r2.precision, 2.0 / 3.0, 1e-9);

    const auto rl = rougeL(toks("John really loves data science and studies it extensively"),
                           toks("John very much loves data science and enjoys it a lot"));
    EXPECT_EQ(rl.n_overlap, 6u);
    EXPECT_NEAR(rl.recall, 6.0 / 11.0, 1e-9);
    EXPECT_NEAR(rl.precision, 6.0 / 9.0, 1e-9);
    EXPECT_NEAR(rl.f1, 2 * (6.0 / 9) * (6.0 / 11) / (6.0 / 9 + 6.0 / 11), 1e-12);
}

TEST(Rouge, ClippedCountsMatchMultisetOracle) {
    std::mt19937_64 rng(31);
    const std::vector<std::string> vocab = {"a", "b", "c", "d", "e"};
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1), len(2, 14);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> c(len(rng)), r(len(rng));
        for (auto& x : c) x = vocab[pick(rng)];
        for (auto& x : r) x = vocab[pick(rng)];
        // Greedy matching of each candidate gram against unused reference grams.
        for (std::size_t n : {1u, 2u}) {
            std::vector<std::vector<std::string>> cg, rg;
            for (std::size_t i = 0; i + n <= c.size(); ++i) cg.emplace_back(c.begin() + i, c.begin() + i + n);
            for (std::size_t i = 0; i + n <= r.size(); ++i) rg.emplace_back(r.begin() + i, r.begin() + i + n);
            std::vector<bool> used(rg.size(), false);
            std::size_t overlap = 0;
            for (const auto& g : cg)
                for (std::size_t k = 0; k < rg.size(); ++k)
                    if (!used[k] && rg[k] == g) {
                        used[k] = true;
                        ++overlap;
                        break;
                    }
            const auto s = n == 1 ? rouge1(c, r) : rouge2(c, r);
            EXPECT_EQ(s.n_overlap, overlap);
            EXPECT_EQ(s.n_candidate, cg.size());
            EXPECT_EQ(s.n_reference, rg.size());
        }
        if (c.size() <= 12) {
            EXPECT_EQ(lcs_length(c, r), lcs_oracle(c, r));
        }
        EXPECT_EQ(lcs_length(c, r), lcs_length(r, c));
        const auto a = rougeL(c, r), b = rougeL(r, c);
        EXPECT_DOUBLE_EQ(a.recall, b.precision);
        EXPECT_DOUBLE_EQ(a.f1, b.f1);
    }
}

TEST(Rouge, EdgeCases) {
    EXPECT_THROW(rouge1(toks("x"), {}), Error);
    EXPECT_THROW(rouge2(toks("x y"), toks("x")), Error);
    EXPECT_THROW(rougeL(toks("x"), {}), Error);
    const auto empty = rouge1({}, toks("a b"));
    EXPECT_EQ(empty.recall, 0.0);
    EXPECT_EQ(empty.precision, 0.0);
    EXPECT_EQ(empty.f1, 0.0);
    const auto same = rougeL(toks("a b c"), toks("a b c"));
    EXPECT_EQ(same.f1, 1.0);
}

TEST(Rouge, RunAveragesAndTables) {
    const std::vector<std::pair<std::string, std::string>> topics{{"c0", "John loves data science."}, {"c1", "a b c"}};
    const std::vector<std::string> refs{"John really loves data science", "a b c"};
    const auto run = score_run(topics, refs);
    EXPECT_NEAR(run.mean_r1.recall, (0.8 + 1.0) / 2, 1e-12);
    EXPECT_NEAR(run.mean_r2.precision, (2.0 / 3 + 1.0) / 2, 1e-12);

    const auto csv = scores_csv(run);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "topic,variant,recall,precision,f1");
    EXPECT_NE(csv.find("c0,rouge-1,0.800000,1.000000,0.888889\n"), std::string::npos);
    EXPECT_NE(csv.find("mean,rouge-l,"), std::string::npos);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 3 * 3);

    const auto table = scores_table(run, "stub");
    EXPECT_NE(table.find("System"), std::string::npos);
    EXPECT_NE(table.find("ROUGE-1  ROUGE-2  ROUGE-L"), std::string::npos);
    EXPECT_NE(table.find("stub"), std::string::npos);

    EXPECT_THROW(score_run(topics, {"x"}), Error);
    EXPECT_THROW(score_run({}, {}), Error);
}

TEST(Rouge, GroundTruthConcatenation) {
    const std::vector<Document> docs{{"a", {}, "t", std::string("First summary.")}, {"b", {}, "t", std::string("Second.")}};
    EXPECT_EQ(concat_ground_truth(docs), "First summary. Second.");
    EXPECT_THROW(concat_ground_truth({{"c", {}, "t", {}}}), Error);
}
