#include "fbjudge/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include "fbjudge/aggregate.hpp"
#include "fbjudge/error.hpp"
#include "fbjudge/judge.hpp"
#include "fbjudge/log.hpp"
#include "fbjudge/metrics.hpp"
#include "fbjudge/mock_backend.hpp"
#include "fbjudge/util.hpp"

namespace fbjudge {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kRunSchemaVersion = "fbjudge.run/1";
constexpr const char* kRunLogName = "run_log.jsonl";

std::filesystem::path meta_path_for(const std::filesystem::path& records_path) {
    std::filesystem::path out = records_path;
    if (out.extension() == ".jsonl") out.replace_extension();
    out += ".meta.json";
    return out;
}

/// Stem without ".jsonl" (and without ".feedback" for feedback files).
std::string records_stem(const std::filesystem::path& path) {
    std::string name = path.filename().string();
    for (std::string_view suffix : {".jsonl", ".feedback"}) {
        if (name.size() > suffix.size() && name.ends_with(suffix)) {
            name.resize(name.size() - suffix.size());
        }
    }
    return name;
}

ordered_json read_meta_if_present(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return nullptr;
    try {
        return ordered_json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        warn("ignoring unreadable provenance file " + path.string() + ": " + e.what());
        return nullptr;
    }
}

ordered_json timestamp_range(const std::vector<ChatExchange>& exchanges) {
    if (exchanges.empty()) return nullptr;
    auto [lo, hi] = std::minmax_element(
        exchanges.begin(), exchanges.end(),
        [](const ChatExchange& a, const ChatExchange& b) { return a.timestamp < b.timestamp; });
    return ordered_json{{"first", lo->timestamp}, {"last", hi->timestamp}};
}

template <typename Record>
void write_batch(const std::filesystem::path& records_path, const Batch<Record>& batch,
                 const ordered_json& meta, StageResult& result) {
    write_file_atomic(records_path, to_jsonl(batch.records));
    const auto errors = errors_path_for(records_path);
    write_file_atomic(errors, to_jsonl(batch.failures));
    const auto meta_path = meta_path_for(records_path);
    write_file_atomic(meta_path, meta.dump(2) + "\n");
    result.records = batch.records.size();
    result.failures = batch.failures.size();
    result.exit_code = batch.failures.empty() ? kExitOk : kExitPartial;
    result.outputs = {records_path, errors, meta_path};
}

}  // namespace

std::shared_ptr<ChatBackend> default_backend_factory(const BackendConfig& config) {
    switch (config.type) {
        case BackendConfig::Type::openai: {
            RetryPolicy retry;
            retry.max_attempts = config.max_attempts;
            return std::make_shared<HttpChatBackend>(config.spec, retry);
        }
        case BackendConfig::Type::mock:
            return std::make_shared<MockBackend>(config.spec, MockScript::load(config.mock_script));
    }
    throw ConfigError("unsupported backend type");
}

Pipeline::Pipeline(RunConfig config, BackendFactory factory)
    : config_(std::move(config)), factory_(std::move(factory)) {
    config_.validate();
    templates_ = config_.template_dir ? load_templates(*config_.template_dir) : default_templates();
}

const Corpus& Pipeline::corpus() {
    if (!corpus_) {
        if (config_.corpus_path.empty()) throw ConfigError("no corpus configured");
        corpus_ = load_corpus(config_.corpus_path, config_.corpus_mode);
        for (const auto& w : corpus_->load_warnings) warn(w);
    }
    return *corpus_;
}

std::shared_ptr<ChatBackend> Pipeline::backend(const std::string& name) {
    std::lock_guard lock(mutex_);
    if (auto it = backends_.find(name); it != backends_.end()) return it->second;

    BackendConfig bc = config_.backend(name);
    if (config_.max_parallel_override > 0) bc.spec.max_parallel = config_.max_parallel_override;
    if (!bc.params.greedy()) {
        warn("backend '" + name + "' overrides greedy decoding (temperature " +
             format_double(bc.params.temperature) + ")");
    }
    std::shared_ptr<ChatBackend> b = factory_(bc);
    if (!config_.cache_dir.empty()) {
        // Created on first use so that a rejected invocation leaves no directory behind.
        if (!cache_) cache_ = std::make_shared<ResponseCache>(config_.cache_dir);
        b = std::make_shared<CachedBackend>(std::move(b), cache_);
    }
    backends_.emplace(name, b);
    return b;
}

std::size_t Pipeline::backend_calls() const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& [_, b] : backends_) n += b->calls();
    return n;
}

ordered_json Pipeline::backend_provenance(const std::string& name) const {
    const BackendConfig& b = config_.backend(name);
    ordered_json j;
    j["type"] = b.type == BackendConfig::Type::openai ? "openai" : "mock";
    j["model_id"] = b.spec.model_id;
    j["base_url"] = b.spec.base_url;
    j["display_name"] = b.shown_name();
    j["decoding"] = {{"temperature", b.params.temperature},
                     {"max_tokens", b.spec.max_output_tokens}};
    return j;
}

void Pipeline::append_run_log(const std::string& stage, const std::vector<ChatExchange>& exchanges,
                              const std::vector<std::string>& request_ids) {
    std::error_code ec;
    std::filesystem::create_directories(config_.output_dir, ec);
    std::ofstream out(config_.output_dir / kRunLogName, std::ios::app | std::ios::binary);
    if (!out) {
        warn("cannot append to run log in " + config_.output_dir.string());
        return;
    }
    for (std::size_t i = 0; i < exchanges.size(); ++i) {
        ordered_json entry;
        entry["stage"] = stage;
        entry["request_id"] = i < request_ids.size() ? request_ids[i] : "";
        const ordered_json details = exchanges[i].log_entry();
        for (const auto& [k, v] : details.items()) entry[k] = v;
        out << entry.dump() << '\n';
    }
}

StageResult Pipeline::generate(const std::string& generator) {
    config_.backend(generator);  // UnknownBackend before any other work
    const Corpus& items = corpus();
    auto client = backend(generator);

    GenerateOptions options;
    options.templates = &*templates_;
    options.params = config_.backend(generator).params;
    GenerationBatch batch = generate_feedback(items, *client, options);

    ordered_json meta;
    meta["schema_version"] = kRunSchemaVersion;
    meta["stage"] = "generate";
    meta["config_hash"] = config_.hash();
    meta["template_version"] = templates_->version;
    meta["system_prompt_delivery"] = "system-message";
    meta["corpus"] = {{"path", items.source_path},
                      {"schema_version", items.schema_version},
                      {"items", items.items.size()}};
    meta["generator"] = generator;
    meta["backends"] = {{generator, backend_provenance(generator)}};
    meta["exchange_timestamps"] = timestamp_range(batch.exchanges);
    meta["counts"] = {{"records", batch.records.size()}, {"failures", batch.failures.size()}};

    StageResult result;
    write_batch(config_.output_dir / feedback_file_name(generator), batch, meta, result);

    std::vector<std::string> ids;
    for (const auto& r : batch.records) ids.push_back(r.request_id);
    append_run_log("generate", batch.exchanges, ids);

    result.messages.push_back("generate " + generator + ": " + std::to_string(result.records) +
                              " feedback records, " + std::to_string(result.failures) +
                              " failures -> " + result.outputs.front().string());
    return result;
}

StageResult Pipeline::judge(const std::filesystem::path& feedback_file,
                            const std::optional<std::string>& judge_name) {
    const std::string judge = judge_name.value_or(config_.judge_backend);
    if (judge.empty()) throw ConfigError("no judge backend configured");
    config_.backend(judge);

    std::vector<FeedbackRecord> feedback = read_feedback_file(feedback_file);
    if (feedback.empty()) throw NoItems("feedback file '" + feedback_file.string() + "' is empty");
    const std::string generator = feedback.front().generator_name;
    for (const auto& f : feedback) {
        if (f.generator_name != generator) {
            throw Error("MixedGenerators", "feedback file '" + feedback_file.string() +
                                               "' mixes generators '" + generator + "' and '" +
                                               f.generator_name + "'");
        }
    }

    const Corpus& items = corpus();
    auto client = backend(judge);

    JudgeOptions options;
    options.templates = &*templates_;
    options.params = config_.backend(judge).params;
    options.parse_mode = config_.parse_mode;
    if (auto it = config_.backends.find(generator); it != config_.backends.end()) {
        options.generator_display_name = it->second.shown_name();
    }
    JudgeBatch batch = judge_feedback(items, feedback, *client, options);

    std::size_t flagged = 0;
    for (const auto& r : batch.records) flagged += r.consistency_flag ? 1 : 0;

    ordered_json meta;
    meta["schema_version"] = kRunSchemaVersion;
    meta["stage"] = "judge";
    meta["config_hash"] = config_.hash();
    meta["template_version"] = templates_->version;
    meta["system_prompt_delivery"] = "system-message";
    meta["corpus"] = {{"path", items.source_path},
                      {"schema_version", items.schema_version},
                      {"items", items.items.size()}};
    meta["generator"] = generator;
    meta["generator_display_name"] =
        options.generator_display_name.empty() ? generator : options.generator_display_name;
    meta["judge"] = judge;
    meta["parse_mode"] = to_string(config_.parse_mode);
    meta["feedback_file"] = feedback_file.generic_string();
    meta["backends"] = {{judge, backend_provenance(judge)}};
    meta["exchange_timestamps"] = timestamp_range(batch.exchanges);
    meta["counts"] = {{"records", batch.records.size()},
                      {"failures", batch.failures.size()},
                      {"consistency_flags", flagged}};
    meta["upstream"] = read_meta_if_present(meta_path_for(feedback_file));

    StageResult result;
    write_batch(config_.output_dir / judgment_file_name(generator, judge), batch, meta, result);

    std::vector<std::string> ids;
    for (const auto& r : batch.records) ids.push_back(r.request_id);
    append_run_log("judge", batch.exchanges, ids);

    result.messages.push_back("judge " + generator + " with " + judge + ": " +
                              std::to_string(result.records) + " judgments, " +
                              std::to_string(result.failures) + " failures, " +
                              std::to_string(flagged) + " rubric contradictions -> " +
                              result.outputs.front().string());
    return result;
}

StageResult Pipeline::score(const std::filesystem::path& judgment_file) {
    const auto judgments = read_judgment_file(judgment_file);
    const auto failures = read_failure_file(errors_path_for(judgment_file));
    const MetricsReport report = score_run(corpus(), judgments, failures);

    ordered_json bundle = report.to_json();
    ordered_json meta;
    meta["config_hash"] = config_.hash();
    meta["template_version"] = templates_->version;
    meta["judgment_file"] = judgment_file.generic_string();
    meta["judge_run"] = read_meta_if_present(meta_path_for(judgment_file));
    bundle["run_metadata"] = std::move(meta);

    const std::string stem = records_stem(judgment_file);
    const auto json_path = config_.output_dir / (stem + ".metrics.json");
    const auto md_path = config_.output_dir / (stem + ".metrics.md");
    write_file_atomic(json_path, bundle.dump(2) + "\n");
    write_file_atomic(md_path, "# Judge agreement: " + stem + "\n\n" + report.to_markdown());

    StageResult result;
    result.records = report.coverage.judged;
    result.failures = report.coverage.parse_failed;
    result.outputs = {json_path, md_path};
    result.messages.push_back("score " + stem + ": " + std::to_string(report.coverage.judged) +
                              " paired items -> " + json_path.string());
    return result;
}

StageResult Pipeline::aggregate(const std::vector<std::filesystem::path>& judgment_files,
                                const std::string& stem) {
    if (judgment_files.empty()) throw NoJudgments("no judgment files given");

    std::vector<GeneratorSummary> summaries;
    ordered_json inputs = ordered_json::array();
    for (const auto& file : judgment_files) {
        const auto records = read_judgment_file(file);
        if (records.empty()) {
            throw NoJudgments("judgment file '" + file.string() + "' has no parsed judgments");
        }
        const auto failures = read_failure_file(errors_path_for(file));
        std::vector<std::string> generators;
        for (const auto& r : records) {
            if (std::find(generators.begin(), generators.end(), r.generator_name) ==
                generators.end()) {
                generators.push_back(r.generator_name);
            }
        }
        for (const auto& g : generators) {
            const auto excluded = static_cast<std::size_t>(
                std::count_if(failures.begin(), failures.end(),
                              [&](const FailureEntry& f) { return f.generator_name == g; }));
            summaries.push_back(summarize(records, g, excluded));
        }
        inputs.push_back({{"file", file.generic_string()},
                          {"run", read_meta_if_present(meta_path_for(file))}});
    }

    ordered_json meta;
    meta["schema_version"] = kRunSchemaVersion;
    meta["config_hash"] = config_.hash();
    meta["template_version"] = templates_->version;
    meta["inputs"] = std::move(inputs);

    const ReportFiles files = emit_report(summaries, std::nullopt, meta, config_.output_dir, stem);
    StageResult result;
    result.records = summaries.size();
    result.outputs = {files.markdown, files.csv, files.json};
    result.messages.push_back("aggregate: " + std::to_string(summaries.size()) + " rows -> " +
                              files.csv.string());
    return result;
}

StageResult Pipeline::validate() {
    const Corpus& items = corpus();
    StageResult result;
    result.records = items.items.size();
    for (const auto& w : items.load_warnings) result.messages.push_back("warning: " + w);
    for (const auto& w : validate_labels(items)) result.messages.push_back("warning: " + w);
    result.messages.push_back(items.source_path + ": " + std::to_string(items.items.size()) +
                              " items, " + std::to_string(items.labeled_count()) + " labeled");
    return result;
}

}  // namespace fbjudge
