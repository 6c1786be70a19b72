#include "fbjudge/aggregate.hpp"

#include <sstream>

#include "fbjudge/error.hpp"
#include "fbjudge/util.hpp"

namespace fbjudge {

namespace {

using ordered_json = nlohmann::ordered_json;

double fraction(std::size_t num, std::size_t den) {
    return static_cast<double>(num) / static_cast<double>(den);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string md_cell(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += '\\';
        out += (c == '\n' ? ' ' : c);
    }
    return out;
}

}  // namespace

double GeneratorSummary::comprehensive_fraction() const {
    return fraction(comprehensive_count, judged_count);
}

double GeneratorSummary::insightful_fraction() const {
    return fraction(insightful_count, judged_count);
}

double GeneratorSummary::positive_rate(Criterion c) const {
    return fraction(positive_counts[static_cast<std::size_t>(c)], judged_count);
}

ordered_json GeneratorSummary::to_json() const {
    ordered_json j;
    j["generator_name"] = generator_name;
    j["judged_count"] = judged_count;
    j["excluded_count"] = excluded_count;
    j["comprehensive_count"] = comprehensive_count;
    j["insightful_count"] = insightful_count;
    j["comprehensive_fraction"] = comprehensive_fraction();
    j["insightful_fraction"] = insightful_fraction();
    ordered_json rates;
    for (Criterion c : kCriteria) rates[std::string(criterion_name(c))] = positive_rate(c);
    j["positive_rates"] = std::move(rates);
    return j;
}

GeneratorSummary summarize(const std::vector<JudgmentRecord>& judgments,
                           const std::string& generator_name, std::size_t excluded_count) {
    GeneratorSummary s;
    s.generator_name = generator_name;
    s.excluded_count = excluded_count;
    for (const auto& j : judgments) {
        if (j.generator_name != generator_name) continue;
        ++s.judged_count;
        if (j.labels.comprehensive()) ++s.comprehensive_count;
        if (j.labels.insightful()) ++s.insightful_count;
        for (Criterion c : kCriteria) {
            if (j.labels.get(c)) ++s.positive_counts[static_cast<std::size_t>(c)];
        }
    }
    if (s.judged_count == 0) {
        throw NoJudgments("no successful judgments for generator '" + generator_name + "'");
    }
    return s;
}

std::string summaries_csv(const std::vector<GeneratorSummary>& summaries) {
    std::string out = "generator,comprehensive,insightful\n";
    for (const auto& s : summaries) {
        out += csv_field(s.generator_name) + ',' + format_double(s.comprehensive_fraction()) + ',' +
               format_double(s.insightful_fraction()) + '\n';
    }
    return out;
}

std::string summaries_markdown(const std::vector<GeneratorSummary>& summaries) {
    std::ostringstream out;
    out << "| generator | judged | excluded | comprehensive | insightful "
           "| completeness | perceptivity | selectivity |\n";
    out << "|---|---|---|---|---|---|---|---|\n";
    for (const auto& s : summaries) {
        out << "| " << md_cell(s.generator_name) << " | " << s.judged_count << " | "
            << s.excluded_count << " | " << format_metric(MetricValue(s.comprehensive_fraction()))
            << " | " << format_metric(MetricValue(s.insightful_fraction()));
        for (Criterion c : kCriteria) out << " | " << format_metric(MetricValue(s.positive_rate(c)));
        out << " |\n";
    }
    return out.str();
}

ReportFiles emit_report(const std::vector<GeneratorSummary>& summaries,
                        const std::optional<MetricsReport>& scores,
                        const ordered_json& run_metadata, const std::filesystem::path& out_dir,
                        const std::string& stem) {
    if (summaries.empty()) throw NoJudgments("nothing to report: no generator summaries");
    for (const auto& s : summaries) {
        if (s.judged_count == 0) {
            throw NoJudgments("generator '" + s.generator_name + "' has no judged items");
        }
    }

    ReportFiles files{out_dir / (stem + ".md"), out_dir / (stem + ".csv"),
                      out_dir / (stem + ".json")};

    std::string md = "# Feedback quality by generator\n\n" + summaries_markdown(summaries);
    if (scores) md += "\n## Judge agreement with human labels\n\n" + scores->to_markdown();
    write_file_atomic(files.markdown, md);

    write_file_atomic(files.csv, summaries_csv(summaries));

    ordered_json bundle;
    bundle["schema_version"] = kAggregateSchemaVersion;
    bundle["run_metadata"] = run_metadata;
    ordered_json gens = ordered_json::array();
    for (const auto& s : summaries) gens.push_back(s.to_json());
    bundle["generators"] = std::move(gens);
    bundle["metrics"] = scores ? scores->to_json() : ordered_json(nullptr);
    write_file_atomic(files.json, bundle.dump(2) + "\n");
    return files;
}

}  // namespace fbjudge
