#include "collsum/collsum.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace collsum;
namespace fs = std::filesystem;

namespace {

const fs::path kSamples = COLLSUM_SAMPLES_DIR;

PipelineConfig sample_config(const std::string& name, const fs::path& out) {
    auto c = load_config(kSamples / name);
    c.output_dir = out;
    return c;
}

// Every file under `dir` except the manifest and lock, relative, with contents.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), dir).generic_string();
        if (rel == "manifest.json" || rel == ".lock") continue;
        out[rel] = testutil::read_file(e.path());
    }
    return out;
}

std::map<std::string, std::string> manifest_hashes(const nlohmann::json& manifest) {
    std::map<std::string, std::string> out;
    for (const auto& a : manifest.at("artifacts"))
        for (const auto& f : a.at("files")) out[f.at("path").get<std::string>()] = f.at("sha256").get<std::string>();
    return out;
}

class ThrowingCompletion final : public CompletionBackend {
public:
    std::string complete(const std::string&, const CompletionParams&) const override { throw Error("backend unavailable"); }
    std::string id() const override { return "throwing"; }
    std::size_t context_window() const override { return 4096; }
};

} // namespace

TEST(Config, TomlAndJsonDescribeTheSameRun) {
    testutil::TempDir dir;
    const auto toml = toml_to_json(kSamples / "six_docs.toml");
    testutil::write_file(dir / "six.json", toml.dump());
    auto a = load_config(kSamples / "six_docs.toml");
    // Relative paths resolve against each file's directory, so compare from the same base.
    auto b = config_from_json(nlohmann::json::parse(testutil::read_file(dir / "six.json")), kSamples);
    EXPECT_EQ(to_json(a), to_json(b));
    EXPECT_EQ(a.corpus_path, fs::absolute(kSamples) / "six_docs.jsonl");
    EXPECT_EQ(a.clustering.min_cluster_size, 2u);
    EXPECT_FALSE(a.clustering.allow_single_cluster);
}

TEST(Config, ResolvedSnapshotLoadsBack) {
    const auto c = load_config(kSamples / "twenty_docs.json");
    const auto again = config_from_json(to_json(c), "/elsewhere");
    EXPECT_EQ(to_json(again), to_json(c));
}

TEST(Config, SecretsAreRejected) {
    auto j = toml_to_json(kSamples / "six_docs.toml");
    j["completion"]["api_key"] = "sk-123";
    try {
        config_from_json(j, kSamples);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "completion.api_key");
        EXPECT_NE(std::string(e.what()).find("api_key_env"), std::string::npos);
    }
}

TEST(Config, InvalidValuesNameTheirKey) {
    const auto base = toml_to_json(kSamples / "six_docs.toml");
    auto expect_key = [&](nlohmann::json j, const std::string& key) {
        try {
            config_from_json(j, kSamples);
            ADD_FAILURE() << "accepted " << j.dump();
        } catch (const ConfigError& e) {
            EXPECT_EQ(e.key(), key) << e.what();
        }
    };
    auto j = base;
    j["clustering"]["typo"] = 1;
    expect_key(j, "clustering.typo");
    j = base;
    j["clustering"]["min_cluster_size"] = "five";
    expect_key(j, "clustering.min_cluster_size");
    j = base;
    j["sentiment"].erase("lexicon");
    expect_key(j, "sentiment.lexicon");
    j = base;
    j["completion"]["backend"] = "remote";
    expect_key(j, "completion.endpoint");
    j = base;
    j["projection"]["method"] = "tsne";
    expect_key(j, "projection.method");
}

TEST(Config, TomlSyntaxErrorReportsLine) {
    testutil::TempDir dir;
    testutil::write_file(dir / "bad.toml", "[corpus]\npath = \"x\"\n[lda\n");
    try {
        load_config(dir / "bad.toml");
        FAIL();
    } catch (const InputError& e) {
        EXPECT_EQ(e.location(), 3u);
    }
}

TEST(Pipeline, SixDocsCompletesWithEightArtifacts) {
    testutil::TempDir dir;
    const auto m = run_pipeline(sample_config("six_docs.toml", dir / "run"));
    EXPECT_EQ(m.status, "complete");
    const auto manifest = read_json(dir / "run" / "manifest.json");
    ASSERT_EQ(manifest.at("artifacts").size(), 8u);
    std::vector<std::string> stages;
    for (const auto& a : manifest["artifacts"]) stages.push_back(a.at("stage"));
    EXPECT_EQ(stages, (std::vector<std::string>{"ingest", "query", "cluster", "topics", "chunk", "summarize", "sentiment", "export"}));
    EXPECT_EQ(manifest["stages"][7]["status"], "skipped");
    EXPECT_EQ(manifest["config_sha256"], sha256_hex(manifest["config"].dump()));
}

TEST(Pipeline, ManifestListsExactlyTheFilesWritten) {
    testutil::TempDir dir;
    run_pipeline(sample_config("twenty_docs.json", dir / "run"));
    const auto files = snapshot(dir / "run");
    const auto listed = manifest_hashes(read_json(dir / "run" / "manifest.json"));
    ASSERT_EQ(listed.size(), files.size());
    for (const auto& [path, data] : files) {
        ASSERT_TRUE(listed.count(path)) << path;
        EXPECT_EQ(listed.at(path), sha256_hex(data)) << path;
    }
    EXPECT_TRUE(files.count("scores.csv"));
    EXPECT_FALSE(fs::exists(dir / "run" / ".lock"));
}

TEST(Pipeline, RerunIsByteIdentical) {
    testutil::TempDir dir;
    run_pipeline(sample_config("twenty_docs.json", dir / "a"));
    run_pipeline(sample_config("twenty_docs.json", dir / "b"));
    const auto a = snapshot(dir / "a");
    EXPECT_EQ(a, snapshot(dir / "b"));
    EXPECT_TRUE(a.count("viz/index.json"));

    // Same directory again, without resume.
    run_pipeline(sample_config("twenty_docs.json", dir / "a"));
    EXPECT_EQ(snapshot(dir / "a"), a);
}

TEST(Pipeline, ResumeRebuildsDeletedDownstreamStages) {
    testutil::TempDir dir;
    const auto config = sample_config("twenty_docs.json", dir / "run");
    run_pipeline(config);
    const auto before = snapshot(dir / "run");
    for (const char* f : {"chunks.json", "summaries.json", "sentiment.json", "scores.csv", "scores.txt"}) fs::remove(dir / "run" / f);
    fs::remove_all(dir / "run" / "viz");

    const auto m = run_pipeline(config, {.resume = true});
    EXPECT_EQ(snapshot(dir / "run"), before);
    std::vector<std::string> statuses;
    for (const auto& s : m.stages) statuses.push_back(s.status);
    EXPECT_EQ(statuses, (std::vector<std::string>{"resumed", "resumed", "resumed", "resumed", "ran", "ran", "ran", "ran", "ran"}));
    EXPECT_EQ(manifest_hashes(read_json(dir / "run" / "manifest.json")).size(), before.size());
}

TEST(Pipeline, SingleStageRerunMatches) {
    testutil::TempDir dir;
    const auto config = sample_config("six_docs.toml", dir / "run");
    run_pipeline(config);
    const auto before = snapshot(dir / "run");
    fs::remove(dir / "run" / "topics.json");
    Pipeline p(config);
    const auto rec = p.run_stage(Stage::topics);
    ASSERT_EQ(rec.files.size(), 1u);
    EXPECT_EQ(rec.files[0].path, "topics.json");
    EXPECT_EQ(snapshot(dir / "run"), before);
}

TEST(Pipeline, ResumeRefusesADifferentConfig) {
    testutil::TempDir dir;
    auto config = sample_config("six_docs.toml", dir / "run");
    run_pipeline(config);
    config.lda.seed = 2;
    EXPECT_THROW(run_pipeline(config, {.resume = true}), Error);
}

TEST(Pipeline, MissingUpstreamArtifactIsAStageError) {
    testutil::TempDir dir;
    Pipeline p(sample_config("six_docs.toml", dir / "run"));
    try {
        p.run_stage(Stage::cluster);
        FAIL();
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), Stage::cluster);
        EXPECT_NE(std::string(e.what()).find("query.json"), std::string::npos);
    }
}

TEST(Pipeline, FailedStageIsRecordedInManifest) {
    testutil::TempDir dir;
    RunOptions opts;
    opts.completion = std::make_shared<ThrowingCompletion>();
    EXPECT_THROW(run_pipeline(sample_config("six_docs.toml", dir / "run"), opts), StageError);
    const auto manifest = read_json(dir / "run" / "manifest.json");
    EXPECT_EQ(manifest["status"], "failed");
    EXPECT_EQ(manifest["failed_stage"], "summarize");
    EXPECT_NE(manifest["error"].get<std::string>().find("backend unavailable"), std::string::npos);
    EXPECT_EQ(manifest["artifacts"].size(), 5u);
    EXPECT_FALSE(fs::exists(dir / "run" / "summaries.json"));
}

TEST(Pipeline, ConcurrentRunIsRefused) {
    testutil::TempDir dir;
    RunLock held(dir / "run");
    EXPECT_THROW(run_pipeline(sample_config("six_docs.toml", dir / "run")), Error);
}

TEST(Pipeline, SmallCorpusClampsAreRecorded) {
    testutil::TempDir dir;
    auto config = sample_config("six_docs.toml", dir / "run");
    config.clustering.min_cluster_size = 20;
    config.clustering.allow_single_cluster = true;
    config.projection.target_dim = 10;
    const auto m = run_pipeline(config);
    std::set<std::string> settings;
    for (const auto& a : m.settings.at("adjustments")) settings.insert(a.at("setting").get<std::string>());
    EXPECT_TRUE(settings.count("clustering.min_cluster_size"));
    EXPECT_TRUE(settings.count("projection.dim"));
}

TEST(Pipeline, AllNoiseFailsAtClustering) {
    testutil::TempDir dir;
    auto config = sample_config("six_docs.toml", dir / "run");
    config.clustering.min_cluster_size = 20;
    try {
        run_pipeline(config);
        FAIL();
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), Stage::cluster);
    }
    config.noise = NoisePolicy::noise_topic;
    const auto m = run_pipeline(config);
    EXPECT_EQ(m.status, "complete");
    EXPECT_TRUE(fs::exists(dir / "run" / "viz" / "topic_noise.json"));
}

TEST(Pipeline, ExportsValidateAndMatchChunks) {
    testutil::TempDir dir;
    run_pipeline(sample_config("twenty_docs.json", dir / "run"));
    const auto index = read_json(dir / "run" / "viz" / "index.json");
    EXPECT_TRUE(validate_viz_index(index).empty());
    const auto chunks = read_json(dir / "run" / "chunks.json").at("topics");
    ASSERT_EQ(index.at("topics").size(), chunks.size());
    for (std::size_t t = 0; t < chunks.size(); ++t) {
        const auto topic = read_json(dir / "run" / "viz" / index["topics"][t]["file"].get<std::string>());
        EXPECT_TRUE(validate_viz_topic(topic).empty());
        EXPECT_EQ(topic["chunks"].size(), chunks[t]["result"]["chunks"].size());
    }
}

TEST(VizExport, OneRecordPerChunk) {
    TopicSentences ts;
    ts.cluster_id = 4;
    ChunkResult r;
    r.cluster_id = 4;
    for (std::size_t i = 0; i < 28; ++i) ts.sentences.push_back(make_sentence("d" + std::to_string(i / 7), i % 7, "A happy war " + std::to_string(i) + "."));
    for (std::size_t c = 0; c < 14; ++c) r.chunks.push_back(make_chunk(4, ts.sentences, 2 * c, 2 * c + 1));
    for (std::size_t c = 0; c < 14; ++c) r.chunks[c].chunk_index = c;
    const auto lex = load_lexicon(fs::path(COLLSUM_DATA_DIR) / "sentiment_demo.tsv");
    const auto h = score_hierarchy(ts, r.chunks, "A happy day.", lex);
    SummaryNode node;
    node.text = "A happy day.";
    const auto j = viz_topic(ts, r, h, &node);
    EXPECT_TRUE(validate_viz_topic(j).empty());
    ASSERT_EQ(j["chunks"].size(), 14u);
    EXPECT_EQ(j["chunks"][13]["sentences"][1]["index"], 27);
    EXPECT_EQ(j["chunks"][3]["sentences"][0]["doc_id"], "d0");
    EXPECT_EQ(j["abstractive_summary"]["text"], "A happy day.");
}

TEST(VizExport, EmptyTopicHasEmptyChunkList) {
    TopicSentences ts;
    ts.cluster_id = 1;
    const auto j = viz_topic(ts, ChunkResult{}, SentimentHierarchy{}, nullptr);
    EXPECT_TRUE(validate_viz_topic(j).empty());
    EXPECT_TRUE(j["chunks"].is_array());
    EXPECT_TRUE(j["chunks"].empty());
}

TEST(VizExport, ValidatorRejectsBrokenDocuments) {
    TopicSentences ts;
    ts.cluster_id = 0;
    for (std::size_t i = 0; i < 4; ++i) ts.sentences.push_back(make_sentence("d", i, "Calm sentence."));
    ChunkResult r;
    r.chunks = {make_chunk(0, ts.sentences, 0, 1), make_chunk(0, ts.sentences, 2, 3)};
    r.chunks[1].chunk_index = 1;
    const auto lex = load_lexicon(fs::path(COLLSUM_DATA_DIR) / "sentiment_demo.tsv");
    const auto good = viz_topic(ts, r, score_hierarchy(ts, r.chunks, "", lex), nullptr);
    ASSERT_TRUE(validate_viz_topic(good).empty());

    auto bad = good;
    bad["chunks"][0]["valence"] = 1.5;
    EXPECT_FALSE(validate_viz_topic(bad).empty());
    bad = good;
    bad["chunks"][1]["index"] = 5;
    EXPECT_FALSE(validate_viz_topic(bad).empty());
    bad = good;
    bad["chunks"][1]["sentences"][0]["index"] = 0;
    EXPECT_FALSE(validate_viz_topic(bad).empty());
    bad = good;
    bad.erase("topic_id");
    EXPECT_FALSE(validate_viz_topic(bad).empty());
    bad = good;
    bad["chunks"][0]["sentences"] = nlohmann::json::array();
    EXPECT_FALSE(validate_viz_topic(bad).empty());
}
