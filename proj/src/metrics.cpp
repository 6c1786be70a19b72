#include "fbjudge/metrics.hpp"

#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "fbjudge/error.hpp"

namespace fbjudge {

namespace {

using ordered_json = nlohmann::ordered_json;

double ratio(std::uint64_t num, std::uint64_t den) {
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ordered_json MetricValue::to_json() const {
    return defined() ? ordered_json(value()) : ordered_json(nullptr);
}

ConfusionMatrix confusion(std::span<const LabelPair> pairs) {
    if (pairs.empty()) throw EmptyInput("label pair list");
    ConfusionMatrix m;
    for (const auto& p : pairs) {
        if (p.truth) {
            ++(p.predicted ? m.tp : m.fn);
        } else {
            ++(p.predicted ? m.fp : m.tn);
        }
    }
    return m;
}

PrecisionRecallAccuracy precision_recall_accuracy(const ConfusionMatrix& m) {
    if (m.total() == 0) throw EmptyInput("confusion matrix");
    PrecisionRecallAccuracy out;
    if (m.predicted_positives() > 0) out.precision = MetricValue(ratio(m.tp, m.predicted_positives()));
    if (m.truth_positives() > 0) out.recall = MetricValue(ratio(m.tp, m.truth_positives()));
    out.accuracy = MetricValue(ratio(m.tp + m.tn, m.total()));
    return out;
}

MetricValue f_beta(MetricValue precision, MetricValue recall, double beta) {
    if (!(beta > 0.0)) throw InvalidBeta(beta);
    if (!precision.defined() || !recall.defined()) return MetricValue::undefined();
    const double p = precision.value();
    const double r = recall.value();
    const double b2 = beta * beta;
    const double den = b2 * p + r;
    if (den == 0.0) return MetricValue::undefined();
    return MetricValue((1.0 + b2) * p * r / den);
}

MetricValue cohen_kappa(const ConfusionMatrix& m) {
    const std::uint64_t n = m.total();
    if (n == 0) throw EmptyInput("confusion matrix");
    // Chance agreement numerator over n^2, kept integral so p_e == 1 is exact.
    const std::uint64_t chance = m.predicted_positives() * m.truth_positives() +
                                 (m.fn + m.tn) * (m.fp + m.tn);
    if (chance == n * n) return MetricValue::undefined();
    const double p_o = ratio(m.tp + m.tn, n);
    const double p_e = ratio(chance, n * n);
    return MetricValue((p_o - p_e) / (1.0 - p_e));
}

ClassificationScores ClassificationScores::from_matrix(const ConfusionMatrix& m) {
    ClassificationScores s;
    s.matrix = m;
    const auto pra = precision_recall_accuracy(m);
    s.precision = pra.precision;
    s.recall = pra.recall;
    s.accuracy = pra.accuracy;
    s.f05 = f_beta(pra.precision, pra.recall, 0.5);
    s.f1 = f_beta(pra.precision, pra.recall, 1.0);
    s.kappa = cohen_kappa(m);
    return s;
}

ordered_json ClassificationScores::to_json() const {
    ordered_json j;
    j["confusion"] = {{"tp", matrix.tp}, {"fp", matrix.fp}, {"fn", matrix.fn}, {"tn", matrix.tn}};
    j["precision"] = precision.to_json();
    j["recall"] = recall.to_json();
    j["f0.5"] = f05.to_json();
    j["f1"] = f1.to_json();
    j["accuracy"] = accuracy.to_json();
    j["kappa"] = kappa.to_json();
    return j;
}

MajorityBaseline majority_baseline(std::span<const bool> truth) {
    if (truth.empty()) throw EmptyInput("truth label list");
    std::size_t positives = 0;
    for (bool t : truth) positives += t ? 1 : 0;
    MajorityBaseline b;
    b.predicted_label = positives * 2 >= truth.size();
    std::vector<LabelPair> pairs;
    pairs.reserve(truth.size());
    for (bool t : truth) pairs.push_back({t, b.predicted_label});
    b.scores = ClassificationScores::from_matrix(confusion(pairs));
    return b;
}

CriterionScore score_criterion(Criterion criterion, std::span<const LabelPair> pairs) {
    CriterionScore s;
    s.criterion = criterion;
    s.judge = ClassificationScores::from_matrix(confusion(pairs));
    // std::vector<bool> is not contiguous, so use a plain array.
    auto truth = std::make_unique<bool[]>(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) truth[i] = pairs[i].truth;
    s.baseline = majority_baseline(std::span<const bool>(truth.get(), pairs.size()));
    return s;
}

MetricsReport score_run(const Corpus& corpus, const std::vector<JudgmentRecord>& judgments,
                        const std::vector<FailureEntry>& failures) {
    std::map<std::string, const JudgmentRecord*, std::less<>> by_id;
    for (const auto& j : judgments) {
        if (corpus.find(j.request_id) == nullptr) throw UnknownRequest(j.request_id);
        if (!by_id.emplace(j.request_id, &j).second) {
            throw Error("DuplicateJudgment",
                        "more than one judgment for request '" + j.request_id + "'");
        }
    }
    std::set<std::string, std::less<>> failed;
    for (const auto& f : failures) failed.insert(f.request_id);

    MetricsReport report;
    std::array<std::vector<LabelPair>, 3> pairs;
    for (const auto& item : corpus.items) {
        auto it = by_id.find(item.id);
        const bool judged = it != by_id.end();
        if (!item.human_labels) {
            if (judged) ++report.coverage.skipped_unlabeled;
            continue;
        }
        if (!judged) {
            if (failed.contains(item.id)) {
                ++report.coverage.parse_failed;
            } else {
                ++report.coverage.skipped_unjudged;
            }
            continue;
        }
        ++report.coverage.judged;
        for (Criterion c : kCriteria) {
            pairs[static_cast<std::size_t>(c)].push_back(
                {item.human_labels->get(c), it->second->labels.get(c)});
        }
    }
    if (report.coverage.judged == 0) {
        throw NoLabeledItems("no judged item in '" + corpus.source_path + "' has human labels");
    }
    for (Criterion c : kCriteria) {
        const auto idx = static_cast<std::size_t>(c);
        report.criteria[idx] = score_criterion(c, pairs[idx]);
    }
    return report;
}

ordered_json MetricsReport::to_json() const {
    ordered_json j;
    j["schema_version"] = kMetricsSchemaVersion;
    ordered_json rows = ordered_json::array();
    for (const auto& s : criteria) {
        ordered_json row;
        row["criterion"] = criterion_name(s.criterion);
        row["judge"] = s.judge.to_json();
        ordered_json base = s.baseline.scores.to_json();
        base["predicted_label"] = s.baseline.predicted_label;
        row["baseline"] = std::move(base);
        rows.push_back(std::move(row));
    }
    j["criteria"] = std::move(rows);
    j["coverage"] = {{"judged", coverage.judged},
                     {"skipped", coverage.skipped()},
                     {"skipped_unlabeled", coverage.skipped_unlabeled},
                     {"skipped_unjudged", coverage.skipped_unjudged},
                     {"parse_failed", coverage.parse_failed}};
    return j;
}

std::string MetricsReport::to_markdown() const {
    std::ostringstream out;
    out << "| criterion | precision | recall | f0.5 | f1 | accuracy | kappa "
           "| baseline precision | baseline f0.5 | baseline accuracy |\n";
    out << "|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& s : criteria) {
        out << "| " << criterion_name(s.criterion) << " | " << format_metric(s.judge.precision)
            << " | " << format_metric(s.judge.recall) << " | " << format_metric(s.judge.f05)
            << " | " << format_metric(s.judge.f1) << " | " << format_metric(s.judge.accuracy)
            << " | " << format_metric(s.judge.kappa) << " | "
            << format_metric(s.baseline.scores.precision) << " | "
            << format_metric(s.baseline.scores.f05) << " | "
            << format_metric(s.baseline.scores.accuracy) << " |\n";
    }
    out << "\njudged: " << coverage.judged << ", skipped: " << coverage.skipped()
        << " (unlabeled " << coverage.skipped_unlabeled << ", unjudged " << coverage.skipped_unjudged
        << "), parse-failed: " << coverage.parse_failed << "\n";
    return out.str();
}

std::string format_metric(const MetricValue& v) {
    if (!v.defined()) return "n/a";
    // printf rounds the exact binary value; exact ties go to even.
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v.value());
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    return s;
}

double round_half_even(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return std::strtod(buf, nullptr);
}

}  // namespace fbjudge
