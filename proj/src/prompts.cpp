#include "fbjudge/prompts.hpp"

#include <vector>

#include "fbjudge/error.hpp"
#include "fbjudge/util.hpp"

namespace fbjudge {

// Generated from templates/dart-intro by CMake.
namespace embedded {
extern const char* const kVersion;
extern const char* const kFeedbackSystem;
extern const char* const kFeedbackUser;
extern const char* const kJudgeSystem;
extern const char* const kJudgeUser;
}  // namespace embedded

namespace {

struct Token {
    std::size_t begin;  // offset of '{'
    std::size_t end;    // one past '}'
    std::string_view name;
};

bool is_name_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

std::vector<Token> scan_placeholders(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while ((i = text.find('{', i)) != std::string_view::npos) {
        std::size_t j = i + 1;
        while (j < text.size() && is_name_char(text[j])) ++j;
        if (j > i + 1 && j < text.size() && text[j] == '}') {
            tokens.push_back({i, j + 1, text.substr(i + 1, j - i - 1)});
            i = j + 1;
        } else {
            ++i;
        }
    }
    return tokens;
}

std::string drop_trailing_lf(std::string s) {
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
}

const std::set<std::string>& feedback_placeholders() {
    static const std::set<std::string> names = {"handout", "model_solution", "student_code"};
    return names;
}

const std::set<std::string>& judge_placeholders() {
    static const std::set<std::string> names = {"handout",  "model_solution", "student_code",
                                                "feedback", "generator_name", "criteria"};
    return names;
}

}  // namespace

PromptTemplate::PromptTemplate(std::string system_text, std::string user_template,
                               std::set<std::string> required_placeholders)
    : system_text_(std::move(system_text)),
      user_template_(std::move(user_template)),
      required_(std::move(required_placeholders)) {
    std::map<std::string, int, std::less<>> counts;
    for (const auto& tok : scan_placeholders(user_template_)) {
        if (!required_.contains(std::string(tok.name))) {
            throw TemplateError("unknown placeholder '{" + std::string(tok.name) + "}'");
        }
        ++counts[std::string(tok.name)];
    }
    for (const auto& name : required_) {
        auto it = counts.find(name);
        int n = it == counts.end() ? 0 : it->second;
        if (n != 1) {
            throw TemplateError("placeholder '{" + name + "}' must appear exactly once, found " +
                                std::to_string(n));
        }
    }
}

RenderedPrompt PromptTemplate::render(
    const std::map<std::string, std::string_view>& payloads) const {
    for (const auto& name : required_) {
        auto it = payloads.find(name);
        if (it == payloads.end() || is_blank(it->second)) {
            throw MissingField(name);
        }
    }
    RenderedPrompt out;
    out.system = system_text_;
    std::string_view tpl = user_template_;
    std::size_t cursor = 0;
    for (const auto& tok : scan_placeholders(tpl)) {
        out.user.append(tpl.substr(cursor, tok.begin - cursor));
        out.user.append(payloads.at(std::string(tok.name)));
        cursor = tok.end;
    }
    out.user.append(tpl.substr(cursor));
    return out;
}

const PromptTemplates& default_templates() {
    static const PromptTemplates templates{
        PromptTemplate(drop_trailing_lf(embedded::kFeedbackSystem),
                       drop_trailing_lf(embedded::kFeedbackUser), feedback_placeholders()),
        PromptTemplate(drop_trailing_lf(embedded::kJudgeSystem),
                       drop_trailing_lf(embedded::kJudgeUser), judge_placeholders()),
        drop_trailing_lf(embedded::kVersion)};
    return templates;
}

PromptTemplates load_templates(const std::filesystem::path& dir) {
    auto read = [&](const char* name) { return drop_trailing_lf(read_file(dir / name)); };
    return PromptTemplates{
        PromptTemplate(read("feedback.system.txt"), read("feedback.user.txt"),
                       feedback_placeholders()),
        PromptTemplate(read("judge.system.txt"), read("judge.user.txt"), judge_placeholders()),
        read("VERSION")};
}

std::string criteria_block() {
    std::string out;
    for (Criterion c : kCriteria) {
        if (!out.empty()) out += '\n';
        out += '(';
        out += std::to_string(criterion_number(c));
        out += ") ";
        out += criterion_description(c);
    }
    return out;
}

RenderedPrompt render_feedback_prompt(const PromptTemplates& templates,
                                      const HelpRequest& request) {
    return templates.feedback.render({
        {"handout", request.handout},
        {"model_solution", request.model_solution},
        {"student_code", request.student_code},
    });
}

RenderedPrompt render_judge_prompt(const PromptTemplates& templates, const HelpRequest& request,
                                   std::string_view feedback, std::string_view generator_name) {
    static const std::string criteria = criteria_block();
    return templates.judge.render({
        {"handout", request.handout},
        {"model_solution", request.model_solution},
        {"student_code", request.student_code},
        {"feedback", feedback},
        {"generator_name", generator_name},
        {"criteria", criteria},
    });
}

}  // namespace fbjudge
