#include <gtest/gtest.h>

#include <regex>

#include "fbjudge/corpus.hpp"
#include "fbjudge/error.hpp"
#include "fbjudge/prompts.hpp"
#include "support.hpp"

using namespace fbjudge;

namespace {

HelpRequest bond_request() { return load_corpus(test::data_path("bond.jsonl")).items.at(0); }

std::size_t occurrences(const std::string& haystack, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

}  // namespace

TEST(Prompts, FeedbackPromptMatchesGolden) {
    const RenderedPrompt p = render_feedback_prompt(default_templates(), bond_request());
    EXPECT_EQ(p.system, read_file(test::golden_path("bond.feedback.system.txt")));
    EXPECT_EQ(p.user, read_file(test::golden_path("bond.feedback.user.txt")));
}

TEST(Prompts, JudgePromptMatchesGolden) {
    const RenderedPrompt p = render_judge_prompt(default_templates(), bond_request(), "Fix line 2.");
    EXPECT_EQ(p.system, read_file(test::golden_path("bond.judge.system.txt")));
    EXPECT_EQ(p.user, read_file(test::golden_path("bond.judge.user.txt")));
    EXPECT_NE(p.user.find("the feedback generated by GPT-3.5"), std::string::npos);
}

TEST(Prompts, GoldenCriteriaOrder) {
    const std::string golden = read_file(test::golden_path("bond.judge.user.txt"));
    const std::regex order(
        R"(## Criteria:\n\(1\) Identifies and mentions all actual issues\n)"
        R"(\(2\) Identifies and mentions at least one actual issue\n)"
        R"(\(3\) Does not identify non-existent issues$)");
    EXPECT_TRUE(std::regex_search(golden, order));
    EXPECT_EQ(criteria_block(),
              "(1) Identifies and mentions all actual issues\n"
              "(2) Identifies and mentions at least one actual issue\n"
              "(3) Does not identify non-existent issues");
}

TEST(Prompts, StudentCodeFollowsHeader) {
    const HelpRequest r = bond_request();
    const RenderedPrompt p = render_feedback_prompt(default_templates(), r);
    EXPECT_NE(p.user.find("## Student Code:\n" + r.student_code), std::string::npos);
    EXPECT_EQ(p.system,
              "You are a computer science professor teaching introductory programming using Dart.");
}

TEST(Prompts, SectionOrder) {
    const RenderedPrompt p = render_judge_prompt(default_templates(), bond_request(), "Fix line 2.");
    std::size_t last = 0;
    for (const char* header : {"## Problem description:", "## Model solution:", "## Student Code:",
                               "## Feedback:", "## Criteria:"}) {
        const std::size_t at = p.user.find(header);
        ASSERT_NE(at, std::string::npos) << header;
        EXPECT_GT(at, last) << header;
        last = at;
    }
}

TEST(Prompts, GeneratorNameIsAParameter) {
    const RenderedPrompt p =
        render_judge_prompt(default_templates(), bond_request(), "Fix line 2.", "Zephyr-7B");
    EXPECT_NE(p.user.find("the feedback generated by Zephyr-7B."), std::string::npos);
    EXPECT_EQ(p.user.find("GPT-3.5"), std::string::npos);
}

TEST(Prompts, EmptyModelSolutionIsMissingField) {
    HelpRequest r = bond_request();
    r.model_solution = "";
    try {
        render_feedback_prompt(default_templates(), r);
        FAIL() << "expected MissingField";
    } catch (const MissingField& e) {
        EXPECT_EQ(e.field(), "model_solution");
    }
    EXPECT_THROW(render_judge_prompt(default_templates(), bond_request(), " \n "), MissingField);
}

TEST(Prompts, PayloadsAreNotRescanned) {
    HelpRequest r = bond_request();
    r.student_code = "// ## Model solution:\nmain() { print('{handout}'); }";
    const RenderedPrompt p = render_feedback_prompt(default_templates(), r);
    const std::size_t section = p.user.find("## Student Code:\n");
    ASSERT_NE(section, std::string::npos);
    EXPECT_EQ(p.user.substr(section + 17), r.student_code);
    EXPECT_EQ(occurrences(p.user, "## Model solution:"), 2u);
    EXPECT_EQ(occurrences(p.user, r.handout), 1u);
}

TEST(Prompts, EachPayloadAppearsOnce) {
    const HelpRequest r = bond_request();
    const RenderedPrompt p = render_judge_prompt(default_templates(), r, "Unique feedback text 42.");
    EXPECT_EQ(occurrences(p.user, r.handout), 1u);
    EXPECT_EQ(occurrences(p.user, r.model_solution), 1u);
    EXPECT_EQ(occurrences(p.user, r.student_code), 1u);
    EXPECT_EQ(occurrences(p.user, "Unique feedback text 42."), 1u);
}

TEST(Prompts, RenderingIsPure) {
    const HelpRequest r = bond_request();
    const RenderedPrompt a = render_judge_prompt(default_templates(), r, "Fix line 2.");
    const RenderedPrompt b = render_judge_prompt(default_templates(), r, "Fix line 2.");
    EXPECT_EQ(a, b);
}

TEST(Prompts, TemplateValidation) {
    EXPECT_THROW(PromptTemplate("s", "{a} {a}", {"a"}), TemplateError);
    EXPECT_THROW(PromptTemplate("s", "{a}", {"a", "b"}), TemplateError);
    EXPECT_THROW(PromptTemplate("s", "{a} {c}", {"a"}), TemplateError);
    PromptTemplate literal("s", "json {\"k\": 1} {A} {} {a}", {"a"});
    EXPECT_EQ(literal.render({{"a", "x"}}).user, "json {\"k\": 1} {A} {} x");
    EXPECT_THROW(literal.render({}), MissingField);
}

TEST(Prompts, LoadTemplatesFromDirectory) {
    PromptTemplates t = load_templates(FBJ_TEMPLATE_SOURCE_DIR);
    const PromptTemplates& d = default_templates();
    EXPECT_EQ(t.version, d.version);
    EXPECT_EQ(t.version, "dart-intro/1");
    EXPECT_EQ(t.feedback.user_template(), d.feedback.user_template());
    EXPECT_EQ(t.judge.user_template(), d.judge.user_template());
    EXPECT_EQ(t.judge.system_text(), d.judge.system_text());

    test::TempDir dir;
    EXPECT_THROW(load_templates(dir.path()), IoError);
}

TEST(Prompts, CustomTemplatesKeepFixedCriteria) {
    test::TempDir dir;
    write_file_atomic(dir / "VERSION", "py-intro/1\n");
    write_file_atomic(dir / "feedback.system.txt", "You teach Python.\n");
    write_file_atomic(dir / "feedback.user.txt", "{handout}|{model_solution}|{student_code}\n");
    write_file_atomic(dir / "judge.system.txt", "You teach Python.\n");
    write_file_atomic(dir / "judge.user.txt",
                      "{generator_name}:{handout}|{model_solution}|{student_code}|{feedback}\n{criteria}\n");
    PromptTemplates t = load_templates(dir.path());
    EXPECT_EQ(t.version, "py-intro/1");
    HelpRequest r = bond_request();
    r.handout = "H";
    r.model_solution = "M";
    r.student_code = "S";
    EXPECT_EQ(render_feedback_prompt(t, r).user, "H|M|S");
    EXPECT_EQ(render_judge_prompt(t, r, "F", "G").user, "G:H|M|S|F\n" + criteria_block());
}
