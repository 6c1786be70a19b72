#include "fbjudge/corpus.hpp"

#include <array>
#include <string_view>
#include <unordered_set>

#include <json.hpp>

#include "fbjudge/error.hpp"
#include "fbjudge/util.hpp"

namespace fbjudge {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::array<std::string_view, 6> kItemKeys = {
    "id", "exercise_id", "handout", "model_solution", "student_code", "human_labels"};

bool is_known(std::string_view key) {
    for (auto k : kItemKeys) {
        if (k == key) return true;
    }
    return false;
}

std::string require_string(const json& obj, const char* field, std::size_t line) {
    auto it = obj.find(field);
    if (it == obj.end()) {
        throw SchemaError(line, field, "required field is missing");
    }
    if (!it->is_string()) {
        throw SchemaError(line, field, "expected a string");
    }
    return it->get<std::string>();
}

CriteriaLabels parse_labels(const json& obj, std::size_t line, SchemaMode mode,
                            std::vector<std::string>& warnings) {
    if (!obj.is_object()) {
        throw SchemaError(line, "human_labels", "expected an object");
    }
    CriteriaLabels labels;
    for (Criterion c : kCriteria) {
        const std::string name(criterion_name(c));
        auto it = obj.find(name);
        if (it == obj.end()) {
            throw SchemaError(line, "human_labels." + name, "required field is missing");
        }
        if (!it->is_boolean()) {
            throw SchemaError(line, "human_labels." + name, "expected a boolean");
        }
        labels.set(c, it->get<bool>());
    }
    for (const auto& [key, _] : obj.items()) {
        if (key == "completeness" || key == "perceptivity" || key == "selectivity") continue;
        if (mode == SchemaMode::strict) {
            throw SchemaError(line, "human_labels." + key, "unknown key");
        }
        warnings.push_back("line " + std::to_string(line) + ": ignoring unknown key 'human_labels." +
                           key + "'");
    }
    return labels;
}

HelpRequest parse_item(std::string_view text, std::size_t line, SchemaMode mode,
                       std::vector<std::string>& warnings) {
    json obj;
    try {
        obj = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(line, "<line>", std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) {
        throw SchemaError(line, "<line>", "expected a JSON object");
    }

    HelpRequest item;
    item.id = require_string(obj, "id", line);
    if (item.id.empty()) {
        throw SchemaError(line, "id", "must be non-empty");
    }
    item.exercise_id = require_string(obj, "exercise_id", line);
    item.handout = require_string(obj, "handout", line);
    item.model_solution = require_string(obj, "model_solution", line);
    item.student_code = require_string(obj, "student_code", line);
    for (const char* field : {"handout", "model_solution", "student_code"}) {
        if (is_blank(obj[field].get_ref<const std::string&>())) {
            throw SchemaError(line, field, "must be non-empty after trimming");
        }
    }

    if (auto it = obj.find("human_labels"); it != obj.end() && !it->is_null()) {
        item.human_labels = parse_labels(*it, line, mode, warnings);
    }

    for (const auto& [key, _] : obj.items()) {
        if (is_known(key)) continue;
        if (mode == SchemaMode::strict) {
            throw SchemaError(line, key, "unknown key");
        }
        warnings.push_back("line " + std::to_string(line) + ": ignoring unknown key '" + key + "'");
    }
    return item;
}

}  // namespace

const HelpRequest* Corpus::find(std::string_view id) const noexcept {
    for (const auto& item : items) {
        if (item.id == id) return &item;
    }
    return nullptr;
}

std::size_t Corpus::labeled_count() const noexcept {
    std::size_t n = 0;
    for (const auto& item : items) {
        if (item.human_labels) ++n;
    }
    return n;
}

Corpus parse_corpus(std::string_view text, std::string source_path, SchemaMode mode) {
    Corpus corpus;
    corpus.source_path = std::move(source_path);
    std::unordered_set<std::string> seen;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (is_blank(line)) continue;

        HelpRequest item = parse_item(line, line_no, mode, corpus.load_warnings);
        if (!seen.insert(item.id).second) {
            throw DuplicateId(item.id);
        }
        corpus.items.push_back(std::move(item));
    }
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, SchemaMode mode) {
    return parse_corpus(read_file(path), path.string(), mode);
}

std::string serialize_corpus(const Corpus& corpus) {
    std::string out;
    for (const auto& item : corpus.items) {
        ordered_json obj;
        obj["id"] = item.id;
        obj["exercise_id"] = item.exercise_id;
        obj["handout"] = item.handout;
        obj["model_solution"] = item.model_solution;
        obj["student_code"] = item.student_code;
        if (item.human_labels) {
            ordered_json labels;
            for (Criterion c : kCriteria) {
                labels[std::string(criterion_name(c))] = item.human_labels->get(c);
            }
            obj["human_labels"] = std::move(labels);
        }
        out += obj.dump();
        out += '\n';
    }
    return out;
}

std::vector<std::string> validate_labels(const Corpus& corpus) {
    std::vector<std::string> warnings;
    for (const auto& item : corpus.items) {
        if (item.human_labels && item.human_labels->contradicts_rubric()) {
            warnings.push_back("item '" + item.id +
                               "': labeled complete but not perceptive "
                               "(all issues identified implies at least one)");
        }
    }
    return warnings;
}

}  // namespace fbjudge
