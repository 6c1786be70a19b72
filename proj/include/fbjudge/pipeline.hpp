/// @file pipeline.hpp
/// @brief The generate / judge / score / aggregate / validate stages.
///
/// Stages communicate only through files in the output directory (plus the
/// response cache). Each stage returns a StageResult whose exit code follows
/// the CLI convention: 0 success, 2 partial (per-item failures). Hard
/// failures are thrown as fbjudge::Error and map to exit code 1.

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbjudge/backends.hpp"
#include "fbjudge/config.hpp"
#include "fbjudge/corpus.hpp"
#include "fbjudge/prompts.hpp"
#include "fbjudge/response_cache.hpp"

namespace fbjudge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitHardFailure = 1;
inline constexpr int kExitPartial = 2;

/// Builds the uncached backend for a config entry.
using BackendFactory = std::function<std::shared_ptr<ChatBackend>(const BackendConfig&)>;

/// openai -> HttpChatBackend, mock -> MockBackend loaded from its script.
std::shared_ptr<ChatBackend> default_backend_factory(const BackendConfig& config);

struct StageResult {
    int exit_code = kExitOk;
    std::size_t records = 0;
    std::size_t failures = 0;
    std::vector<std::filesystem::path> outputs;
    std::vector<std::string> messages;  // human-readable summary lines
};

class Pipeline {
public:
    /// Validates the config (UnknownBackend) before anything else.
    explicit Pipeline(RunConfig config, BackendFactory factory = default_backend_factory);

    const RunConfig& config() const noexcept { return config_; }
    const PromptTemplates& templates() const noexcept { return *templates_; }

    /// Writes <out>/<generator>.feedback.jsonl, its .errors.jsonl manifest
    /// and .meta.json provenance.
    StageResult generate(const std::string& generator);

    /// Judges a feedback file with `judge` (default: config judge_backend).
    /// Writes <out>/<generator>__<judge>.jsonl, .errors.jsonl and .meta.json.
    /// Throws NoItems for an empty feedback file.
    StageResult judge(const std::filesystem::path& feedback_file,
                      const std::optional<std::string>& judge = std::nullopt);

    /// Writes <stem>.metrics.json / .metrics.md next to the output dir.
    StageResult score(const std::filesystem::path& judgment_file);

    /// One summary row per generator per file, in argument order.
    StageResult aggregate(const std::vector<std::filesystem::path>& judgment_files,
                          const std::string& stem = "comparison");

    /// Corpus lint: schema check plus label-consistency warnings.
    StageResult validate();

    /// Backend by name, created on first use and wrapped in the cache when
    /// cache_dir is set. Throws UnknownBackend.
    std::shared_ptr<ChatBackend> backend(const std::string& name);

    /// Requests that reached a backend (network or script) in this process.
    std::size_t backend_calls() const;

private:
    const Corpus& corpus();
    nlohmann::ordered_json backend_provenance(const std::string& name) const;
    void append_run_log(const std::string& stage, const std::vector<ChatExchange>& exchanges,
                        const std::vector<std::string>& request_ids);

    RunConfig config_;
    BackendFactory factory_;
    std::optional<PromptTemplates> templates_;
    std::optional<Corpus> corpus_;
    std::shared_ptr<ResponseCache> cache_;
    std::map<std::string, std::shared_ptr<ChatBackend>> backends_;
    mutable std::mutex mutex_;
};

}  // namespace fbjudge
