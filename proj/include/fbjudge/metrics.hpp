/// @file metrics.hpp
/// @brief Per-criterion agreement between judge labels and human labels.
///
/// All values are computed at full double precision. Rounding to two
/// decimals (half-to-even) happens only when a report is rendered as
/// Markdown. A metric whose definition divides by zero is Undefined, never
/// 0.0, and serializes as JSON null.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbjudge/corpus.hpp"
#include "fbjudge/judge.hpp"
#include "fbjudge/rubric.hpp"

namespace fbjudge {

inline constexpr const char* kMetricsSchemaVersion = "fbjudge.metrics/1";

class MetricValue {
public:
    constexpr MetricValue() = default;
    constexpr explicit MetricValue(double v) : value_(v) {}
    static constexpr MetricValue undefined() { return MetricValue(); }

    constexpr bool defined() const noexcept { return value_.has_value(); }
    /// Precondition: defined().
    constexpr double value() const { return *value_; }
    constexpr const std::optional<double>& raw() const noexcept { return value_; }

    nlohmann::ordered_json to_json() const;

    friend constexpr bool operator==(const MetricValue&, const MetricValue&) = default;

private:
    std::optional<double> value_;
};

/// Positive = criterion satisfied.
struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    constexpr std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
    constexpr std::uint64_t truth_positives() const noexcept { return tp + fn; }
    constexpr std::uint64_t predicted_positives() const noexcept { return tp + fp; }

    friend constexpr bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct LabelPair {
    bool truth;
    bool predicted;
};

/// Throws EmptyInput.
ConfusionMatrix confusion(std::span<const LabelPair> pairs);

struct PrecisionRecallAccuracy {
    MetricValue precision;
    MetricValue recall;
    MetricValue accuracy;
};

/// Throws EmptyInput for an all-zero matrix.
PrecisionRecallAccuracy precision_recall_accuracy(const ConfusionMatrix& m);

/// (1+b^2)PR / (b^2 P + R). Undefined if P or R is Undefined or the
/// denominator is zero. Throws InvalidBeta for beta <= 0.
MetricValue f_beta(MetricValue precision, MetricValue recall, double beta);

/// Cohen's kappa for two binary raters. Undefined when chance agreement is 1.
/// Throws EmptyInput for an all-zero matrix.
MetricValue cohen_kappa(const ConfusionMatrix& m);

struct ClassificationScores {
    ConfusionMatrix matrix;
    MetricValue precision;
    MetricValue recall;
    MetricValue f05;
    MetricValue f1;
    MetricValue accuracy;
    MetricValue kappa;

    static ClassificationScores from_matrix(const ConfusionMatrix& m);
    nlohmann::ordered_json to_json() const;
};

/// Dummy predictor emitting the majority truth label (ties predict true).
struct MajorityBaseline {
    bool predicted_label = true;
    ClassificationScores scores;
};

/// Throws EmptyInput.
MajorityBaseline majority_baseline(std::span<const bool> truth);

struct CriterionScore {
    Criterion criterion = Criterion::completeness;
    ClassificationScores judge;
    MajorityBaseline baseline;
};

/// Throws EmptyInput.
CriterionScore score_criterion(Criterion criterion, std::span<const LabelPair> pairs);

struct Coverage {
    std::size_t judged = 0;            // paired with human labels
    std::size_t skipped_unlabeled = 0;  // judged, but no human labels
    std::size_t skipped_unjudged = 0;   // labeled, no judgment and no failure row
    std::size_t parse_failed = 0;       // labeled, judging failed (manifest)

    std::size_t skipped() const noexcept { return skipped_unlabeled + skipped_unjudged; }
};

struct MetricsReport {
    std::array<CriterionScore, 3> criteria;
    Coverage coverage;

    const CriterionScore& at(Criterion c) const { return criteria[static_cast<std::size_t>(c)]; }

    nlohmann::ordered_json to_json() const;
    /// Table with columns precision, recall, f0.5, f1, accuracy, kappa and
    /// the baseline's precision, f0.5 and accuracy, two decimals.
    std::string to_markdown() const;
};

/// Pairs judgments with human labels by request id. Failure rows mark items
/// whose judging failed; they are counted, not scored.
///
/// Throws UnknownRequest, Error("DuplicateJudgment") or NoLabeledItems.
MetricsReport score_run(const Corpus& corpus, const std::vector<JudgmentRecord>& judgments,
                        const std::vector<FailureEntry>& failures = {});

/// Round half to even at `decimals` places.
double round_half_even(double value, int decimals);

/// "0.87", or "n/a" for Undefined.
std::string format_metric(const MetricValue& v);

}  // namespace fbjudge
