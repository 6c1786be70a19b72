/// @file judge.hpp
/// @brief Feedback generation, rubric judging and judge-answer parsing.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fbjudge/backends.hpp"
#include "fbjudge/corpus.hpp"
#include "fbjudge/prompts.hpp"
#include "fbjudge/rubric.hpp"

namespace fbjudge {

enum class ParseMode { strict, lenient };

std::string_view to_string(ParseMode mode) noexcept;
/// Throws ConfigError for anything but "strict"/"lenient".
ParseMode parse_mode_from_string(std::string_view s);

/// Parses a judge answer of the form
///
///     (1): Yes
///     (2): No
///     (3): Yes
///
/// Strict: for each criterion exactly one line of the shape
/// `<ws>(N):<ws+>Yes|No[.]<ws>`; other lines are ignored. Lenient: if the
/// strict reading fails, the first `(N): yes|no` anywhere in the text wins.
/// Yes/No are ASCII case-insensitive.
///
/// Throws MissingCriterion, DuplicateCriterion (strict only) or
/// MalformedAnswer. Never throws anything else.
CriteriaLabels parse_judgment(std::string_view text, ParseMode mode = ParseMode::strict);

/// Inverse of parse_judgment: "(1): Yes\n(2): No\n(3): Yes".
std::string format_judgment(const CriteriaLabels& labels);

struct FeedbackRecord {
    std::string request_id;
    std::string generator_name;
    std::string feedback_text;
    std::string exchange_ref;

    nlohmann::ordered_json to_json() const;
    static FeedbackRecord from_json(const nlohmann::json& j);
    friend bool operator==(const FeedbackRecord&, const FeedbackRecord&) = default;
};

struct JudgmentRecord {
    std::string request_id;
    std::string generator_name;
    std::string judge_name;
    CriteriaLabels labels;
    std::string raw_response;
    ParseMode parse_mode = ParseMode::strict;
    bool consistency_flag = false;  // complete but not perceptive
    std::string exchange_ref;

    nlohmann::ordered_json to_json() const;
    static JudgmentRecord from_json(const nlohmann::json& j);
    friend bool operator==(const JudgmentRecord&, const JudgmentRecord&) = default;
};

/// One item that produced no output in a batch stage.
struct FailureEntry {
    std::string request_id;
    std::string generator_name;
    std::string stage;       // "generate" or "judge"
    std::string error_kind;  // Error::kind()
    std::string message;
    std::optional<std::string> raw_response;  // set for parse failures

    nlohmann::ordered_json to_json() const;
    static FailureEntry from_json(const nlohmann::json& j);
};

/// Everything a batch stage produced. Both vectors follow input order.
template <typename Record>
struct Batch {
    std::vector<Record> records;
    std::vector<FailureEntry> failures;
    std::vector<ChatExchange> exchanges;  // successful exchanges, input order
};

using GenerationBatch = Batch<FeedbackRecord>;
using JudgeBatch = Batch<JudgmentRecord>;

struct GenerateOptions {
    const PromptTemplates* templates = nullptr;  // null: default_templates()
    DecodingParams params{};
    /// Overrides the backend's max_parallel when > 0.
    int max_parallel = 0;
};

struct JudgeOptions {
    const PromptTemplates* templates = nullptr;
    DecodingParams params{};
    ParseMode parse_mode = ParseMode::strict;
    int max_parallel = 0;
    /// Name shown to the judge as the feedback's author. Empty: each
    /// record's generator_name.
    std::string generator_display_name;
};

/// One feedback per help request. Per-item failures go to the manifest.
/// Throws NoItems for an empty corpus.
GenerationBatch generate_feedback(const Corpus& corpus, ChatBackend& generator,
                                  const GenerateOptions& options = {});

/// One judge call per feedback record; parse failures become manifest rows.
/// Throws UnknownRequest before any call if a record's request id is not in
/// the corpus.
JudgeBatch judge_feedback(const Corpus& corpus, const std::vector<FeedbackRecord>& feedback,
                          ChatBackend& judge, const JudgeOptions& options = {});

// ---------------------------------------------------------------------------
// JSON Lines files

/// "<generator>.feedback.jsonl" / "<generator>__<judge>.jsonl". Characters outside
/// [A-Za-z0-9._-] are replaced by '_'.
std::string feedback_file_name(std::string_view generator);
std::string judgment_file_name(std::string_view generator, std::string_view judge);
/// Sibling manifest: "x.jsonl" -> "x.errors.jsonl".
std::filesystem::path errors_path_for(const std::filesystem::path& records_path);

template <typename T>
std::string to_jsonl(const std::vector<T>& rows) {
    std::string out;
    for (const auto& row : rows) {
        out += row.to_json().dump();
        out += '\n';
    }
    return out;
}

/// Throws IoError or SchemaError (with line number).
std::vector<FeedbackRecord> read_feedback_file(const std::filesystem::path& path);
std::vector<JudgmentRecord> read_judgment_file(const std::filesystem::path& path);
/// Missing file reads as an empty manifest.
std::vector<FailureEntry> read_failure_file(const std::filesystem::path& path);

}  // namespace fbjudge
