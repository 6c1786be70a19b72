/// @file aggregate.hpp
/// @brief Per-generator comprehensive/insightful fractions and report files.

#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbjudge/judge.hpp"
#include "fbjudge/metrics.hpp"

namespace fbjudge {

inline constexpr const char* kAggregateSchemaVersion = "fbjudge.aggregate/1";

struct GeneratorSummary {
    std::string generator_name;
    std::size_t judged_count = 0;
    std::size_t excluded_count = 0;  // failed judgments, not in denominators
    std::size_t comprehensive_count = 0;
    std::size_t insightful_count = 0;
    std::array<std::size_t, 3> positive_counts{};  // per criterion, rubric order

    double comprehensive_fraction() const;
    double insightful_fraction() const;
    double positive_rate(Criterion c) const;

    nlohmann::ordered_json to_json() const;
};

/// Comprehensive = all three criteria true; insightful = perceptive and
/// selective. Only `generator_name`'s records count. Throws NoJudgments if
/// there are none.
GeneratorSummary summarize(const std::vector<JudgmentRecord>& judgments,
                           const std::string& generator_name, std::size_t excluded_count = 0);

struct ReportFiles {
    std::filesystem::path markdown;
    std::filesystem::path csv;
    std::filesystem::path json;
};

/// Writes `<stem>.md`, `<stem>.csv` (generator,comprehensive,insightful) and
/// `<stem>.json` (full precision plus `run_metadata`) into `out_dir`. Output
/// is a pure function of the arguments. Throws NoJudgments for no summaries,
/// IoError on write failure.
ReportFiles emit_report(const std::vector<GeneratorSummary>& summaries,
                        const std::optional<MetricsReport>& scores,
                        const nlohmann::ordered_json& run_metadata,
                        const std::filesystem::path& out_dir,
                        const std::string& stem = "comparison");

std::string summaries_csv(const std::vector<GeneratorSummary>& summaries);
std::string summaries_markdown(const std::vector<GeneratorSummary>& summaries);

}  // namespace fbjudge
