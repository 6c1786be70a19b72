// fbjudge: generate, judge, score and aggregate programming-feedback runs.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fbjudge/error.hpp"
#include "fbjudge/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config;
    std::string corpus;
    std::string corpus_mode;
    std::string out;
    std::string cache_dir;
    std::string parse_mode;
    std::string template_dir;
    int max_parallel = 0;
    bool no_cache = false;
};

fbjudge::RunConfig build_config(const CommonOptions& o) {
    fbjudge::RunConfig c;
    if (!o.config.empty()) c = fbjudge::RunConfig::load(o.config);
    if (!o.corpus.empty()) c.corpus_path = o.corpus;
    if (!o.corpus_mode.empty()) {
        if (o.corpus_mode == "strict") {
            c.corpus_mode = fbjudge::SchemaMode::strict;
        } else if (o.corpus_mode == "lenient") {
            c.corpus_mode = fbjudge::SchemaMode::lenient;
        } else {
            throw fbjudge::ConfigError("--corpus-mode must be 'strict' or 'lenient'");
        }
    }
    if (!o.out.empty()) c.output_dir = o.out;
    if (!o.cache_dir.empty()) c.cache_dir = o.cache_dir;
    if (o.no_cache) c.cache_dir.clear();
    if (!o.parse_mode.empty()) c.parse_mode = fbjudge::parse_mode_from_string(o.parse_mode);
    if (!o.template_dir.empty()) c.template_dir = fs::path(o.template_dir);
    if (o.max_parallel > 0) c.max_parallel_override = o.max_parallel;
    return c;
}

int report(const fbjudge::StageResult& r) {
    for (const auto& m : r.messages) std::cout << m << '\n';
    return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate programming feedback with language models and grade it with a judge model"};
    app.require_subcommand(1);
    app.fallthrough();

    CommonOptions common;
    app.add_option("--config", common.config, "Run configuration (JSON)");
    app.add_option("--corpus", common.corpus, "Corpus file (JSON Lines); overrides the config");
    app.add_option("--corpus-mode", common.corpus_mode, "strict|lenient handling of unknown keys");
    app.add_option("--out", common.out, "Output directory");
    app.add_option("--cache-dir", common.cache_dir, "Response cache directory");
    app.add_flag("--no-cache", common.no_cache, "Disable the response cache");
    app.add_option("--parse-mode", common.parse_mode, "Judge answer parsing: strict|lenient");
    app.add_option("--template-dir", common.template_dir, "Prompt template directory");
    app.add_option("--max-parallel", common.max_parallel, "Concurrent requests per backend")
        ->check(CLI::PositiveNumber);

    auto* generate = app.add_subcommand("generate", "Generate feedback for every help request");
    std::vector<std::string> generators;
    generate->add_option("-g,--generator", generators,
                         "Generator backend (repeatable; default: generator_backends)");

    auto* judge = app.add_subcommand("judge", "Grade generated feedback with the judge model");
    std::string judge_name;
    std::vector<std::string> feedback_files;
    judge->add_option("-j,--judge", judge_name, "Judge backend (default: judge_backend)");
    judge->add_option("feedback", feedback_files, "Feedback files")->required();

    auto* score = app.add_subcommand("score", "Compare judge labels against human labels");
    std::vector<std::string> score_files;
    score->add_option("judgments", score_files, "Judgment files")->required();

    auto* aggregate = app.add_subcommand("aggregate", "Tabulate judged feedback per generator");
    std::vector<std::string> aggregate_files;
    std::string stem = "comparison";
    aggregate->add_option("judgments", aggregate_files, "Judgment files")->required();
    aggregate->add_option("--stem", stem, "Report file stem");

    auto* validate = app.add_subcommand("validate", "Check a corpus and its labels");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? fbjudge::kExitOk : fbjudge::kExitHardFailure;
    }

    try {
        fbjudge::Pipeline pipeline(build_config(common));
        int code = fbjudge::kExitOk;
        auto merge = [&code](int c) { code = std::max(code, c); };

        if (generate->parsed()) {
            if (generators.empty()) generators = pipeline.config().generator_backends;
            if (generators.empty()) {
                throw fbjudge::ConfigError("no generator given and none configured");
            }
            for (const auto& g : generators) pipeline.config().backend(g);
            for (const auto& g : generators) merge(report(pipeline.generate(g)));
        } else if (judge->parsed()) {
            std::optional<std::string> j;
            if (!judge_name.empty()) {
                pipeline.config().backend(judge_name);
                j = judge_name;
            }
            for (const auto& f : feedback_files) merge(report(pipeline.judge(f, j)));
        } else if (score->parsed()) {
            for (const auto& f : score_files) merge(report(pipeline.score(f)));
        } else if (aggregate->parsed()) {
            std::vector<fs::path> files(aggregate_files.begin(), aggregate_files.end());
            merge(report(pipeline.aggregate(files, stem)));
        } else if (validate->parsed()) {
            merge(report(pipeline.validate()));
        }
        return code;
    } catch (const fbjudge::Error& e) {
        std::cerr << "error: " << e.kind() << ": " << e.what() << '\n';
        return fbjudge::kExitHardFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return fbjudge::kExitHardFailure;
    }
}
