// Acceptance suite. Prints one PASS/FAIL line per criterion.
//
//   acceptance        run all criteria
//   acceptance N      run criterion N only
//
// Exit status is 0 only if every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "fbjudge/corpus.hpp"
#include "fbjudge/error.hpp"
#include "fbjudge/judge.hpp"
#include "fbjudge/metrics.hpp"
#include "fbjudge/pipeline.hpp"
#include "fbjudge/prompts.hpp"
#include "oracle/rational.hpp"
#include "support.hpp"

using namespace fbjudge;
using oracle::Rational;

namespace {

// Pinned tolerances and budgets.
constexpr double kOracleTolerance = 1e-12;
constexpr double kMetricsBudgetSeconds = 5.0;
constexpr double kPipelineBudgetSeconds = 10.0;
constexpr int kOracleSets = 1000;
constexpr int kOracleMaxItems = 200;
constexpr int kFuzzCases = 10000;

struct Outcome {
    bool pass = true;
    std::vector<std::string> problems;
    std::string detail;

    void fail(const std::string& why) {
        pass = false;
        if (problems.size() < 8) problems.push_back(why);
    }
    void require(bool ok, const std::string& why) {
        if (!ok) fail(why);
    }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fixed(double v, int decimals = 3) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string show(const MetricValue& v) { return v.defined() ? format_double(v.value()) : "undefined"; }

/// Defined-ness must agree; defined values within tolerance.
bool matches(const MetricValue& got, const oracle::Value& want) {
    if (got.defined() != want.has_value()) return false;
    return !got.defined() || std::fabs(got.value() - want->to_double()) <= kOracleTolerance;
}

bool matches_json(const nlohmann::json& got, const oracle::Value& want) {
    if (got.is_null()) return !want.has_value();
    return want.has_value() && got.is_number() &&
           std::fabs(got.get<double>() - want->to_double()) <= kOracleTolerance;
}

// ---------------------------------------------------------------------------

Outcome c1_metrics_oracle() {
    Outcome o;
    std::mt19937_64 rng(20240521);
    std::uniform_int_distribution<int> size(1, kOracleMaxItems);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t compared = 0;

    const auto start = std::chrono::steady_clock::now();
    for (int set = 0; set < kOracleSets; ++set) {
        const int n = size(rng);
        // Vary class balance and agreement so degenerate sets also occur.
        const double p_truth = unit(rng) < 0.1 ? (set % 2 == 0 ? 1.0 : 0.0) : unit(rng);
        const double p_agree = unit(rng);
        std::vector<LabelPair> pairs;
        std::vector<std::pair<bool, bool>> raw;
        for (int i = 0; i < n; ++i) {
            const bool truth = unit(rng) < p_truth;
            const bool predicted = unit(rng) < p_agree ? truth : !truth;
            pairs.push_back({truth, predicted});
            raw.emplace_back(truth, predicted);
        }
        const ClassificationScores got = ClassificationScores::from_matrix(confusion(pairs));
        const oracle::Scores want = oracle::score(raw);
        const std::pair<const char*, std::pair<const MetricValue*, const oracle::Value*>> rows[] = {
            {"precision", {&got.precision, &want.precision}}, {"recall", {&got.recall, &want.recall}},
            {"accuracy", {&got.accuracy, &want.accuracy}},    {"f0.5", {&got.f05, &want.f05}},
            {"f1", {&got.f1, &want.f1}},                      {"kappa", {&got.kappa, &want.kappa}}};
        for (const auto& [name, values] : rows) {
            ++compared;
            if (!matches(*values.first, *values.second)) {
                o.fail("set " + std::to_string(set) + " " + name + ": got " + show(*values.first));
            }
        }
    }
    const double elapsed = seconds_since(start);
    o.require(elapsed < kMetricsBudgetSeconds, "runtime " + fixed(elapsed) + " s");
    o.detail = std::to_string(kOracleSets) + " sets, " + std::to_string(compared) + " values, " +
               fixed(elapsed) + " s";
    return o;
}

Outcome c2_reference_fscores() {
    struct Row {
        const char* criterion;
        double precision, recall, f05, f1;
    };
    const Row rows[] = {{"completeness", 0.70, 0.95, 0.74, 0.81},
                        {"perceptivity", 0.84, 1.00, 0.87, 0.91},
                        {"selectivity", 0.65, 0.94, 0.69, 0.77}};
    Outcome o;
    std::ostringstream detail;
    for (const auto& r : rows) {
        const MetricValue p(r.precision);
        const MetricValue rc(r.recall);
        const MetricValue f05 = f_beta(p, rc, 0.5);
        const MetricValue f1 = f_beta(p, rc, 1.0);
        if (!f05.defined() || !f1.defined()) {
            o.fail(std::string(r.criterion) + ": undefined F");
            continue;
        }
        const double got05 = round_half_even(f05.value(), 2);
        const double got1 = round_half_even(f1.value(), 2);
        o.require(format_metric(MetricValue(got05)) == format_metric(MetricValue(r.f05)) &&
                      format_metric(MetricValue(got1)) == format_metric(MetricValue(r.f1)),
                  std::string(r.criterion) + ": got (" + fixed(got05, 2) + ", " + fixed(got1, 2) + ")");
        detail << r.criterion << " (" << fixed(got05, 2) << ", " << fixed(got1, 2) << ") ";
    }
    o.detail = detail.str();
    return o;
}

Outcome c3_annotation_totals() {
    struct Row {
        const char* criterion;
        int truth_true, truth_false, predicted_true, predicted_false;
    };
    const Row rows[] = {{"completeness", 82, 68, 113, 37},
                        {"perceptivity", 127, 23, 127, 23},
                        {"selectivity", 78, 72, 106, 44}};
    const int total_truth_true = 283, total_truth_false = 167;
    const int total_predicted_true = 246, total_predicted_false = 104;

    Outcome o;
    int tt = 0, tf = 0, pt = 0, pf = 0;
    for (const auto& r : rows) {
        o.require(r.truth_true + r.truth_false == 150,
                  std::string(r.criterion) + " truth sums to " + std::to_string(r.truth_true + r.truth_false));
        o.require(r.predicted_true + r.predicted_false == 150,
                  std::string(r.criterion) + " predicted sums to " +
                      std::to_string(r.predicted_true + r.predicted_false));
        tt += r.truth_true;
        tf += r.truth_false;
        pt += r.predicted_true;
        pf += r.predicted_false;
    }
    o.require(tt == total_truth_true && tf == total_truth_false,
              "truth totals recompute to " + std::to_string(tt) + "/" + std::to_string(tf) + ", table says " +
                  std::to_string(total_truth_true) + "/" + std::to_string(total_truth_false));
    o.require(pt == total_predicted_true && pf == total_predicted_false,
              "predicted totals recompute to " + std::to_string(pt) + "/" + std::to_string(pf) +
                  ", table says " + std::to_string(total_predicted_true) + "/" +
                  std::to_string(total_predicted_false));
    o.detail = "rows sum to 150; totals " + std::to_string(tt) + "/" + std::to_string(tf) + " and " +
               std::to_string(pt) + "/" + std::to_string(pf);
    return o;
}

Outcome c4_parser() {
    Outcome o;
    for (int bits = 0; bits < 8; ++bits) {
        const CriteriaLabels labels{(bits & 4) != 0, (bits & 2) != 0, (bits & 1) != 0};
        const std::string text = format_judgment(labels);
        for (ParseMode mode : {ParseMode::strict, ParseMode::lenient}) {
            try {
                o.require(parse_judgment(text, mode) == labels,
                          "round trip differs for " + text + " (" + std::string(to_string(mode)) + ")");
            } catch (const std::exception& e) {
                o.fail("round trip threw for combination " + std::to_string(bits) + ": " + e.what());
            }
        }
    }

    // Half the cases are arbitrary bytes, half are built from answer tokens
    // so that the deeper parse paths (and successes) are exercised too.
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> length(0, 96);
    std::uniform_int_distribution<int> byte(0, 255);
    const std::vector<std::string> tokens = {"(1):", "(2):", "(3):", "(4):", " ", " ",  "Yes", "No",
                                             "yes",  "NO",   ".",    "\n",   "\n", "\t", "x",   "(1)"};
    std::uniform_int_distribution<std::size_t> pick(0, tokens.size() - 1);
    std::uniform_int_distribution<int> token_count(0, 24);
    int labeled = 0, typed_errors = 0;
    for (int i = 0; i < kFuzzCases; ++i) {
        std::string text;
        if (i % 2 == 0) {
            const int len = length(rng);
            for (int k = 0; k < len; ++k) text += static_cast<char>(byte(rng));
        } else if (i % 4 == 1) {
            const int count = token_count(rng);
            for (int k = 0; k < count; ++k) text += tokens[pick(rng)];
        } else {
            // Well-formed answer with one random token spliced in.
            const int bits = static_cast<int>(rng() % 8);
            text = format_judgment({(bits & 4) != 0, (bits & 2) != 0, (bits & 1) != 0});
            text.insert(rng() % (text.size() + 1), tokens[pick(rng)]);
        }
        for (ParseMode mode : {ParseMode::strict, ParseMode::lenient}) {
            try {
                parse_judgment(text, mode);
                ++labeled;
            } catch (const JudgmentParseError&) {
                ++typed_errors;
            } catch (const std::exception& e) {
                o.fail("case " + std::to_string(i) + ": untyped exception " + e.what());
            } catch (...) {
                o.fail("case " + std::to_string(i) + ": non-standard exception");
            }
        }
    }
    o.detail = "8 combinations x 2 modes; " + std::to_string(kFuzzCases) + " fuzz inputs x 2 modes: " +
               std::to_string(labeled) + " labeled, " + std::to_string(typed_errors) + " typed errors";
    return o;
}

Outcome c5_prompt_goldens() {
    Outcome o;
    const HelpRequest request = load_corpus(test::data_path("bond.jsonl")).items.at(0);
    const RenderedPrompt feedback = render_feedback_prompt(default_templates(), request);
    const RenderedPrompt judge = render_judge_prompt(default_templates(), request, "Fix line 2.");
    const std::pair<const std::string*, const char*> files[] = {
        {&feedback.system, "bond.feedback.system.txt"},
        {&feedback.user, "bond.feedback.user.txt"},
        {&judge.system, "bond.judge.system.txt"},
        {&judge.user, "bond.judge.user.txt"}};
    for (const auto& [rendered, name] : files) {
        o.require(*rendered == read_file(test::golden_path(name)), std::string(name) + " differs");
    }
    const std::regex order(
        R"(## Criteria:\n\(1\) Identifies and mentions all actual issues\n)"
        R"(\(2\) Identifies and mentions at least one actual issue\n)"
        R"(\(3\) Does not identify non-existent issues$)");
    o.require(std::regex_search(judge.user, order), "criteria block order");
    o.detail = "4 golden files byte-identical, criteria order (1)(2)(3)";
    return o;
}

// ---------------------------------------------------------------------------
// End-to-end run over tests/data/e2e_*.

struct E2eRun {
    double seconds = 0;
    std::size_t backend_calls = 0;
    int exit_code = 0;
};

E2eRun run_e2e(const std::filesystem::path& work) {
    RunConfig config = RunConfig::load(test::data_path("e2e_config.json"));
    config.output_dir = work / "out";
    config.cache_dir = work / "cache";
    const auto start = std::chrono::steady_clock::now();
    Pipeline pipeline(config);
    E2eRun run;
    run.exit_code = std::max(run.exit_code, pipeline.generate("tutor").exit_code);
    run.exit_code = std::max(run.exit_code, pipeline.judge(config.output_dir / "tutor.feedback.jsonl").exit_code);
    run.exit_code = std::max(run.exit_code, pipeline.score(config.output_dir / "tutor__judge.jsonl").exit_code);
    run.exit_code = std::max(run.exit_code, pipeline.aggregate({config.output_dir / "tutor__judge.jsonl"}).exit_code);
    run.seconds = seconds_since(start);
    run.backend_calls = pipeline.backend_calls();
    return run;
}

/// Hand-computed agreement for the e2e corpus and judge script.
struct Expected {
    const char* criterion;
    std::int64_t tp, fp, fn, tn;
    oracle::Value precision, recall, accuracy, f05, f1, kappa;
    oracle::Value base_precision, base_recall, base_accuracy, base_f05, base_f1, base_kappa;
};

std::vector<Expected> hand_oracle() {
    const Rational zero(0), one(1);
    return {
        {"completeness", 4, 3, 1, 2, Rational(4, 7), Rational(4, 5), Rational(3, 5), Rational(20, 33),
         Rational(2, 3), Rational(1, 5), Rational(1, 2), one, Rational(1, 2), Rational(5, 9), Rational(2, 3),
         zero},
        {"perceptivity", 8, 1, 0, 1, Rational(8, 9), one, Rational(9, 10), Rational(10, 11), Rational(16, 17),
         Rational(8, 13), Rational(4, 5), one, Rational(4, 5), Rational(5, 6), Rational(8, 9), zero},
        {"selectivity", 3, 5, 1, 1, Rational(3, 8), Rational(3, 4), Rational(2, 5), Rational(5, 12),
         Rational(1, 2), Rational(-1, 14), std::nullopt, zero, Rational(3, 5), std::nullopt, std::nullopt, zero},
    };
}

Outcome c6_end_to_end() {
    Outcome o;
    test::TempDir work;
    const E2eRun run = run_e2e(work.path());
    o.require(run.exit_code == kExitOk, "exit code " + std::to_string(run.exit_code));
    o.require(run.seconds < kPipelineBudgetSeconds, "runtime " + fixed(run.seconds) + " s");

    const auto metrics = nlohmann::json::parse(read_file(work / "out/tutor__judge.metrics.json"));
    const auto& rows = metrics.at("criteria");
    const auto expected = hand_oracle();
    o.require(rows.size() == expected.size(), "criteria rows");
    for (std::size_t i = 0; i < std::min<std::size_t>(rows.size(), expected.size()); ++i) {
        const Expected& e = expected[i];
        const auto& row = rows[i];
        const std::string c = e.criterion;
        o.require(row.at("criterion") == c, "row order at " + c);
        const auto& judge = row.at("judge");
        const auto& m = judge.at("confusion");
        o.require(m.at("tp") == e.tp && m.at("fp") == e.fp && m.at("fn") == e.fn && m.at("tn") == e.tn,
                  c + " matrix " + m.dump());
        const std::pair<const char*, const oracle::Value*> judge_values[] = {
            {"precision", &e.precision}, {"recall", &e.recall}, {"accuracy", &e.accuracy},
            {"f0.5", &e.f05},            {"f1", &e.f1},         {"kappa", &e.kappa}};
        for (const auto& [key, want] : judge_values) {
            o.require(matches_json(judge.at(key), *want), c + " " + key + " = " + judge.at(key).dump());
        }
        const auto& base = row.at("baseline");
        const std::pair<const char*, const oracle::Value*> base_values[] = {
            {"precision", &e.base_precision}, {"recall", &e.base_recall}, {"accuracy", &e.base_accuracy},
            {"f0.5", &e.base_f05},            {"f1", &e.base_f1},         {"kappa", &e.base_kappa}};
        for (const auto& [key, want] : base_values) {
            o.require(matches_json(base.at(key), *want), c + " baseline " + key + " = " + base.at(key).dump());
        }
    }
    o.require(metrics.at("coverage").at("judged") == 10, "coverage " + metrics.at("coverage").dump());

    const auto summary = nlohmann::json::parse(read_file(work / "out/comparison.json"));
    const auto& gen = summary.at("generators").at(0);
    const double comprehensive = gen.at("comprehensive_fraction").get<double>();
    const double insightful = gen.at("insightful_fraction").get<double>();
    o.require(comprehensive == 0.7, "comprehensive_fraction " + format_double(comprehensive));
    o.require(insightful == 0.8, "insightful_fraction " + format_double(insightful));
    o.require(comprehensive <= insightful, "comprehensive exceeds insightful");
    o.require(read_file(work / "out/comparison.csv") == "generator,comprehensive,insightful\ntutor,0.7,0.8\n",
              "comparison.csv");

    o.detail = "10 items, " + std::to_string(run.backend_calls) + " backend calls, comprehensive " +
               format_double(comprehensive) + " <= insightful " + format_double(insightful) + ", " +
               fixed(run.seconds) + " s";
    return o;
}

std::map<std::string, std::string> bundle(const std::filesystem::path& out) {
    std::map<std::string, std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(out)) {
        const std::string name = entry.path().filename().string();
        if (name == "run_log.jsonl") continue;  // append-only operational log
        files[name] = read_file(entry.path());
    }
    return files;
}

Outcome c7_cache_determinism() {
    Outcome o;
    test::TempDir work;
    const E2eRun cold = run_e2e(work.path());
    o.require(cold.backend_calls == 20, "cold run made " + std::to_string(cold.backend_calls) + " calls");
    const auto first = bundle(work / "out");

    const E2eRun warm = run_e2e(work.path());
    o.require(warm.backend_calls == 0, "warm run made " + std::to_string(warm.backend_calls) + " calls");
    o.require(warm.exit_code == cold.exit_code, "exit codes differ");
    const auto second = bundle(work / "out");
    o.require(first.size() == second.size(), "bundle file count differs");
    for (const auto& [name, bytes] : first) {
        const auto it = second.find(name);
        o.require(it != second.end() && it->second == bytes, name + " differs");
    }
    o.detail = std::to_string(first.size()) + " files byte-identical, warm run " +
               std::to_string(warm.backend_calls) + " backend calls";
    return o;
}

Outcome c8_degenerate() {
    struct Case {
        const char* name;
        std::vector<LabelPair> pairs;
        oracle::Value precision, recall, accuracy, f05, f1, kappa;
    };
    const Rational zero(0), one(1);
    const std::vector<LabelPair> all_pos(6, LabelPair{true, true});
    const std::vector<LabelPair> all_neg(6, LabelPair{false, false});
    const std::vector<LabelPair> pos_vs_neg(6, LabelPair{true, false});
    const Case cases[] = {
        {"all-positive", all_pos, one, one, one, one, one, std::nullopt},
        {"all-negative", all_neg, std::nullopt, std::nullopt, one, std::nullopt, std::nullopt, std::nullopt},
        {"single (T,T)", {{true, true}}, one, one, one, one, one, std::nullopt},
        {"single (F,F)", {{false, false}}, std::nullopt, std::nullopt, one, std::nullopt, std::nullopt,
         std::nullopt},
        {"single (T,F)", {{true, false}}, std::nullopt, zero, zero, std::nullopt, std::nullopt, zero},
        {"single (F,T)", {{false, true}}, zero, std::nullopt, zero, std::nullopt, std::nullopt, zero},
        {"positive truth, negative predictions", pos_vs_neg, std::nullopt, zero, zero, std::nullopt,
         std::nullopt, zero},
    };

    Outcome o;
    int undefined_seen = 0;
    for (const auto& c : cases) {
        const ClassificationScores s = ClassificationScores::from_matrix(confusion(c.pairs));
        const nlohmann::ordered_json j = s.to_json();
        const std::tuple<const char*, const MetricValue*, const oracle::Value*> values[] = {
            {"precision", &s.precision, &c.precision}, {"recall", &s.recall, &c.recall},
            {"accuracy", &s.accuracy, &c.accuracy},    {"f0.5", &s.f05, &c.f05},
            {"f1", &s.f1, &c.f1},                      {"kappa", &s.kappa, &c.kappa}};
        for (const auto& [key, got, want] : values) {
            o.require(matches(*got, *want), std::string(c.name) + " " + key + " = " + show(*got));
            o.require(j.at(key).is_null() == !want->has_value(),
                      std::string(c.name) + " " + key + " JSON " + j.at(key).dump());
            if (!got->defined()) {
                ++undefined_seen;
                o.require(format_metric(*got) == "n/a", std::string(c.name) + " " + key + " renders as " +
                                                            format_metric(*got));
            }
        }
    }
    try {
        confusion({});
        o.fail("empty input accepted");
    } catch (const EmptyInput&) {
    }
    o.detail = std::to_string(std::size(cases)) + " inputs, " + std::to_string(undefined_seen) +
               " Undefined values, all as null / n/a";
    return o;
}

struct Criterion_ {
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    set_warning_handler([](const std::string&) {});
    const std::vector<Criterion_> criteria = {
        {"metrics oracle equivalence", c1_metrics_oracle},
        {"reference F-score consistency", c2_reference_fscores},
        {"annotation count totals", c3_annotation_totals},
        {"parser round trip and fuzz", c4_parser},
        {"prompt goldens", c5_prompt_goldens},
        {"end-to-end mock pipeline", c6_end_to_end},
        {"cache determinism", c7_cache_determinism},
        {"degenerate inputs", c8_degenerate},
    };

    int only = 0;
    if (argc > 1) {
        only = std::atoi(argv[1]);
        if (only < 1 || only > static_cast<int>(criteria.size())) {
            std::cerr << "usage: acceptance [1-" << criteria.size() << "]\n";
            return 2;
        }
    }

    bool all_pass = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only != 0 && static_cast<int>(i) + 1 != only) continue;
        Outcome o;
        try {
            o = criteria[i].run();
        } catch (const Error& e) {
            o.fail(std::string(e.kind()) + ": " + e.what());
        } catch (const std::exception& e) {
            o.fail(e.what());
        }
        all_pass = all_pass && o.pass;
        std::cout << "C" << i + 1 << ' ' << (o.pass ? "PASS" : "FAIL") << ' ' << criteria[i].name;
        if (!o.detail.empty()) std::cout << " (" << o.detail << ")";
        std::cout << '\n';
        for (const auto& p : o.problems) std::cout << "    " << p << '\n';
    }
    return all_pass ? 0 : 1;
}
