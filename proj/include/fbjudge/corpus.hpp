/// @file corpus.hpp
/// @brief Help-request dataset: JSON Lines loading, serialization, label lint.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fbjudge/rubric.hpp"

namespace fbjudge {

inline constexpr const char* kCorpusSchemaVersion = "fbjudge.corpus/1";

/// One incorrect student program with its exercise context.
struct HelpRequest {
    std::string id;
    std::string exercise_id;
    std::string handout;
    std::string model_solution;
    std::string student_code;
    std::optional<CriteriaLabels> human_labels;

    friend bool operator==(const HelpRequest&, const HelpRequest&) = default;
};

/// Immutable after load; iteration order is file order.
struct Corpus {
    std::vector<HelpRequest> items;
    std::string source_path;
    std::string schema_version = kCorpusSchemaVersion;
    /// Non-fatal notes from loading (e.g. unknown keys in lenient mode).
    std::vector<std::string> load_warnings;

    const HelpRequest* find(std::string_view id) const noexcept;
    std::size_t labeled_count() const noexcept;
};

enum class SchemaMode { strict, lenient };

/// Loads a JSON Lines corpus. Blank lines are skipped; line numbers in errors
/// are 1-based physical lines.
///
/// Throws IoError, SchemaError (first violation, with line and field) or
/// DuplicateId.
Corpus load_corpus(const std::filesystem::path& path, SchemaMode mode = SchemaMode::strict);

/// Same as load_corpus but from an in-memory buffer.
Corpus parse_corpus(std::string_view text, std::string source_path,
                    SchemaMode mode = SchemaMode::strict);

/// One JSON object per line, LF-terminated, keys in schema order.
std::string serialize_corpus(const Corpus& corpus);

/// Items whose human labels say "complete" but not "perceptive". Warnings
/// name the item id. Items without labels are skipped.
std::vector<std::string> validate_labels(const Corpus& corpus);

}  // namespace fbjudge
