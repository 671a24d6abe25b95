#include "collsum/collsum.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Flags {
    std::string config;
    std::string out;
    bool resume = false;
    bool quiet = false;
};

collsum::PipelineConfig load(const Flags& f) {
    auto config = collsum::load_config(f.config);
    if (!f.out.empty()) config.output_dir = std::filesystem::absolute(f.out);
    return config;
}

collsum::RunOptions options(const Flags& f) {
    collsum::RunOptions o;
    o.resume = f.resume;
    if (!f.quiet) o.log = [](const std::string& m) { std::cerr << "collsum: " << m << '\n'; };
    return o;
}

int run_all(const Flags& f) {
    const auto manifest = collsum::run_pipeline(load(f), options(f));
    for (const auto& s : manifest.stages) {
        std::cout << collsum::to_string(s.stage) << ": " << s.status;
        for (const auto& file : s.files) std::cout << ' ' << file.path;
        if (!s.note.empty()) std::cout << " (" << s.note << ')';
        std::cout << '\n';
    }
    return 0;
}

int run_one(const Flags& f, collsum::Stage stage) {
    const auto config = load(f);
    collsum::RunLock lock(config.output_dir);
    collsum::Pipeline pipeline(config, options(f));
    const auto rec = pipeline.run_stage(stage);
    std::cout << collsum::to_string(stage) << ": " << rec.status;
    for (const auto& file : rec.files) std::cout << ' ' << (config.output_dir / file.path).string();
    if (!rec.note.empty()) std::cout << " (" << rec.note << ')';
    std::cout << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-document abstractive summarization"};
    app.set_version_flag("--version", std::string(COLLSUM_VERSION));
    app.require_subcommand(1);
    Flags flags;
    app.add_option("--config", flags.config, "Pipeline config (.toml or .json)")->required()->check(CLI::ExistingFile);
    app.add_option("--out", flags.out, "Output directory (overrides output.dir)");
    app.add_flag("--resume", flags.resume, "Keep artifacts of completed stages");
    app.add_flag("-q,--quiet", flags.quiet, "No progress messages");
    app.fallthrough();

    app.add_subcommand("run", "Run every stage and write manifest.json");
    for (collsum::Stage s : collsum::kAllStages)
        app.add_subcommand(collsum::to_string(s), "Run only the " + collsum::to_string(s) + " stage from existing artifacts");

    CLI11_PARSE(app, argc, argv);
    const std::string name = app.get_subcommands().front()->get_name();
    try {
        if (name == "run") return run_all(flags);
        return run_one(flags, collsum::parse_stage(name));
    } catch (const collsum::ConfigError& e) {
        std::cerr << "collsum: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "collsum: " << e.what() << '\n';
        return 1;
    }
}
