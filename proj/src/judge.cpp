#include "fbjudge/judge.hpp"

#include <array>
#include <variant>

#include "fbjudge/error.hpp"
#include "fbjudge/executor.hpp"
#include "fbjudge/util.hpp"

namespace fbjudge {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr int kNumCriteria = static_cast<int>(kCriteria.size());

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (ascii_lower(a[i]) != ascii_lower(b[i])) return false;
    }
    return true;
}

std::optional<bool> yes_no(std::string_view token) {
    if (iequals(token, "yes")) return true;
    if (iequals(token, "no")) return false;
    return std::nullopt;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

/// Criterion number if `s` starts with "(N)" for N in 1..3, else 0.
int criterion_marker(std::string_view s) {
    if (s.size() < 3 || s[0] != '(' || s[2] != ')') return 0;
    const int n = s[1] - '0';
    return (n >= 1 && n <= kNumCriteria) ? n : 0;
}

CriteriaLabels to_labels(const std::array<std::optional<bool>, 3>& answers) {
    CriteriaLabels labels;
    for (Criterion c : kCriteria) labels.set(c, *answers[static_cast<std::size_t>(c)]);
    return labels;
}

CriteriaLabels parse_strict(std::string_view text) {
    std::array<std::optional<bool>, 3> answers;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;

        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
        const int n = criterion_marker(line);
        if (n == 0 || line.size() < 4 || line[3] != ':') continue;

        std::string_view rest = line.substr(4);
        if (rest.empty() || (rest.front() != ' ' && rest.front() != '\t')) throw MalformedAnswer(n);
        std::string_view token = trim(rest);
        if (!token.empty() && token.back() == '.') token.remove_suffix(1);
        const auto answer = yes_no(token);
        if (!answer) throw MalformedAnswer(n);

        auto& slot = answers[static_cast<std::size_t>(n - 1)];
        if (slot) throw DuplicateCriterion(n);
        slot = answer;
    }
    for (int n = 1; n <= kNumCriteria; ++n) {
        if (!answers[static_cast<std::size_t>(n - 1)]) throw MissingCriterion(n);
    }
    return to_labels(answers);
}

CriteriaLabels parse_lenient_scan(std::string_view text) {
    std::array<std::optional<bool>, 3> answers;
    std::array<bool, 3> marker_seen{};
    for (std::size_t i = text.find('('); i != std::string_view::npos; i = text.find('(', i + 1)) {
        const int n = criterion_marker(text.substr(i));
        if (n == 0) continue;
        std::size_t j = i + 3;
        while (j < text.size() && is_space(text[j])) ++j;
        if (j >= text.size() || text[j] != ':') continue;
        ++j;
        while (j < text.size() && (is_space(text[j]) || text[j] == '\n')) ++j;
        std::size_t k = j;
        while (k < text.size() && is_alpha(text[k])) ++k;

        const auto idx = static_cast<std::size_t>(n - 1);
        marker_seen[idx] = true;
        if (answers[idx]) continue;
        answers[idx] = yes_no(text.substr(j, k - j));
    }
    for (int n = 1; n <= kNumCriteria; ++n) {
        const auto idx = static_cast<std::size_t>(n - 1);
        if (!answers[idx]) {
            if (marker_seen[idx]) throw MalformedAnswer(n);
            throw MissingCriterion(n);
        }
    }
    return to_labels(answers);
}

std::string sanitize_file_component(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '.' || c == '_' || c == '-';
        out.push_back(ok ? c : '_');
    }
    return out.empty() ? "_" : out;
}

struct ItemFailure {
    std::string kind;
    std::string message;
};

template <typename Record>
using ItemOutcome = std::variant<std::monostate, std::pair<Record, ChatExchange>, ItemFailure>;

/// Runs `work(i)` for each index with failures captured per item, then
/// assembles a Batch in input order.
template <typename Record, typename Work, typename Describe>
Batch<Record> run_batch(std::size_t count, int max_parallel, const std::string& stage, Work&& work,
                        Describe&& describe) {
    std::vector<ItemOutcome<Record>> outcomes(count);
    parallel_for(count, max_parallel, [&](std::size_t i) {
        try {
            outcomes[i] = work(i);
        } catch (const Error& e) {
            outcomes[i] = ItemFailure{e.kind(), e.what()};
        } catch (const std::exception& e) {
            outcomes[i] = ItemFailure{"InternalError", e.what()};
        }
    });

    Batch<Record> batch;
    for (std::size_t i = 0; i < count; ++i) {
        auto& outcome = outcomes[i];
        if (auto* ok = std::get_if<std::pair<Record, ChatExchange>>(&outcome)) {
            batch.records.push_back(std::move(ok->first));
            batch.exchanges.push_back(std::move(ok->second));
        } else if (auto* fail = std::get_if<ItemFailure>(&outcome)) {
            FailureEntry entry = describe(i);
            entry.stage = stage;
            entry.error_kind = std::move(fail->kind);
            entry.message = std::move(fail->message);
            batch.failures.push_back(std::move(entry));
        }
    }
    return batch;
}

}  // namespace

std::string_view to_string(ParseMode mode) noexcept {
    return mode == ParseMode::strict ? "strict" : "lenient";
}

ParseMode parse_mode_from_string(std::string_view s) {
    if (s == "strict") return ParseMode::strict;
    if (s == "lenient") return ParseMode::lenient;
    throw ConfigError("parse mode must be 'strict' or 'lenient', got '" + std::string(s) + "'");
}

CriteriaLabels parse_judgment(std::string_view text, ParseMode mode) {
    if (mode == ParseMode::strict) return parse_strict(text);
    try {
        return parse_strict(text);
    } catch (const JudgmentParseError&) {
        return parse_lenient_scan(text);
    }
}

std::string format_judgment(const CriteriaLabels& labels) {
    std::string out;
    for (Criterion c : kCriteria) {
        if (!out.empty()) out += '\n';
        out += '(' + std::to_string(criterion_number(c)) + "): " + (labels.get(c) ? "Yes" : "No");
    }
    return out;
}

// ---------------------------------------------------------------------------
// records

ordered_json FeedbackRecord::to_json() const {
    ordered_json j;
    j["request_id"] = request_id;
    j["generator_name"] = generator_name;
    j["feedback_text"] = feedback_text;
    j["exchange_ref"] = exchange_ref;
    return j;
}

FeedbackRecord FeedbackRecord::from_json(const json& j) {
    FeedbackRecord r;
    r.request_id = j.at("request_id").get<std::string>();
    r.generator_name = j.at("generator_name").get<std::string>();
    r.feedback_text = j.at("feedback_text").get<std::string>();
    r.exchange_ref = j.value("exchange_ref", std::string());
    if (is_blank(r.feedback_text)) throw MissingField("feedback_text");
    return r;
}

ordered_json JudgmentRecord::to_json() const {
    ordered_json j;
    j["request_id"] = request_id;
    j["generator_name"] = generator_name;
    j["judge_name"] = judge_name;
    ordered_json l;
    for (Criterion c : kCriteria) l[std::string(criterion_name(c))] = labels.get(c);
    j["labels"] = std::move(l);
    j["raw_response"] = raw_response;
    j["parse_mode"] = to_string(parse_mode);
    j["consistency_flag"] = consistency_flag;
    j["exchange_ref"] = exchange_ref;
    return j;
}

JudgmentRecord JudgmentRecord::from_json(const json& j) {
    JudgmentRecord r;
    r.request_id = j.at("request_id").get<std::string>();
    r.generator_name = j.at("generator_name").get<std::string>();
    r.judge_name = j.at("judge_name").get<std::string>();
    const auto& l = j.at("labels");
    for (Criterion c : kCriteria) r.labels.set(c, l.at(std::string(criterion_name(c))).get<bool>());
    r.raw_response = j.at("raw_response").get<std::string>();
    r.parse_mode = parse_mode_from_string(j.at("parse_mode").get<std::string>());
    r.consistency_flag = j.at("consistency_flag").get<bool>();
    r.exchange_ref = j.value("exchange_ref", std::string());
    return r;
}

ordered_json FailureEntry::to_json() const {
    ordered_json j;
    j["request_id"] = request_id;
    j["generator_name"] = generator_name;
    j["stage"] = stage;
    j["error_kind"] = error_kind;
    j["message"] = message;
    if (raw_response) j["raw_response"] = *raw_response;
    return j;
}

FailureEntry FailureEntry::from_json(const json& j) {
    FailureEntry e;
    e.request_id = j.at("request_id").get<std::string>();
    e.generator_name = j.value("generator_name", std::string());
    e.stage = j.at("stage").get<std::string>();
    e.error_kind = j.at("error_kind").get<std::string>();
    e.message = j.value("message", std::string());
    if (j.contains("raw_response")) e.raw_response = j["raw_response"].get<std::string>();
    return e;
}

// ---------------------------------------------------------------------------
// batches

GenerationBatch generate_feedback(const Corpus& corpus, ChatBackend& generator,
                                  const GenerateOptions& options) {
    if (corpus.items.empty()) throw NoItems("corpus '" + corpus.source_path + "' has no items");
    const PromptTemplates& templates =
        options.templates != nullptr ? *options.templates : default_templates();
    const BackendSpec& spec = generator.spec();
    const int parallel = options.max_parallel > 0 ? options.max_parallel : spec.max_parallel;

    return run_batch<FeedbackRecord>(
        corpus.items.size(), parallel, "generate",
        [&](std::size_t i) {
            const HelpRequest& item = corpus.items[i];
            ChatExchange ex = generator.complete(render_feedback_prompt(templates, item), options.params);
            if (is_blank(ex.response_text)) {
                throw EmptyResponse("generator returned only whitespace");
            }
            FeedbackRecord rec{item.id, spec.name, ex.response_text, ex.id};
            return std::make_pair(std::move(rec), std::move(ex));
        },
        [&](std::size_t i) {
            FailureEntry e;
            e.request_id = corpus.items[i].id;
            e.generator_name = spec.name;
            return e;
        });
}

JudgeBatch judge_feedback(const Corpus& corpus, const std::vector<FeedbackRecord>& feedback,
                          ChatBackend& judge, const JudgeOptions& options) {
    std::vector<const HelpRequest*> items;
    items.reserve(feedback.size());
    for (const auto& rec : feedback) {
        const HelpRequest* item = corpus.find(rec.request_id);
        if (item == nullptr) throw UnknownRequest(rec.request_id);
        items.push_back(item);
    }
    const PromptTemplates& templates =
        options.templates != nullptr ? *options.templates : default_templates();
    const BackendSpec& spec = judge.spec();
    const int parallel = options.max_parallel > 0 ? options.max_parallel : spec.max_parallel;

    // Parse failures keep the raw response; collected here by index.
    std::vector<std::optional<std::string>> raw_on_failure(feedback.size());

    return run_batch<JudgmentRecord>(
        feedback.size(), parallel, "judge",
        [&](std::size_t i) {
            const FeedbackRecord& fb = feedback[i];
            const std::string& shown_name = options.generator_display_name.empty()
                                                ? fb.generator_name
                                                : options.generator_display_name;
            ChatExchange ex = judge.complete(
                render_judge_prompt(templates, *items[i], fb.feedback_text, shown_name),
                options.params);
            JudgmentRecord rec;
            rec.request_id = fb.request_id;
            rec.generator_name = fb.generator_name;
            rec.judge_name = spec.name;
            rec.raw_response = ex.response_text;
            rec.parse_mode = options.parse_mode;
            rec.exchange_ref = ex.id;
            try {
                rec.labels = parse_judgment(ex.response_text, options.parse_mode);
            } catch (const JudgmentParseError&) {
                raw_on_failure[i] = ex.response_text;
                throw;
            }
            rec.consistency_flag = rec.labels.contradicts_rubric();
            return std::make_pair(std::move(rec), std::move(ex));
        },
        [&](std::size_t i) {
            FailureEntry e;
            e.request_id = feedback[i].request_id;
            e.generator_name = feedback[i].generator_name;
            e.raw_response = raw_on_failure[i];
            return e;
        });
}

// ---------------------------------------------------------------------------
// files

std::string feedback_file_name(std::string_view generator) {
    return sanitize_file_component(generator) + ".feedback.jsonl";
}

std::string judgment_file_name(std::string_view generator, std::string_view judge) {
    return sanitize_file_component(generator) + "__" + sanitize_file_component(judge) + ".jsonl";
}

std::filesystem::path errors_path_for(const std::filesystem::path& records_path) {
    std::filesystem::path out = records_path;
    if (out.extension() == ".jsonl") out.replace_extension();
    out += ".errors.jsonl";
    return out;
}

namespace {

template <typename T>
std::vector<T> read_jsonl(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::vector<T> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (is_blank(line)) continue;
        try {
            rows.push_back(T::from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw SchemaError(line_no, "<record>", path.string() + ": " + e.what());
        } catch (const MissingField& e) {
            throw SchemaError(line_no, e.field(), path.string() + ": must be non-empty");
        } catch (const ConfigError& e) {
            throw SchemaError(line_no, "parse_mode", path.string() + ": " + e.what());
        }
    }
    return rows;
}

}  // namespace

std::vector<FeedbackRecord> read_feedback_file(const std::filesystem::path& path) {
    return read_jsonl<FeedbackRecord>(path);
}

std::vector<JudgmentRecord> read_judgment_file(const std::filesystem::path& path) {
    return read_jsonl<JudgmentRecord>(path);
}

std::vector<FailureEntry> read_failure_file(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return {};
    return read_jsonl<FailureEntry>(path);
}

}  // namespace fbjudge
