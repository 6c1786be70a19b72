/// @file prompts.hpp
/// @brief Byte-exact rendering of the feedback and judge prompts.

#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "fbjudge/corpus.hpp"

namespace fbjudge {

inline constexpr const char* kDefaultGeneratorName = "GPT-3.5";

struct RenderedPrompt {
    std::string system;
    std::string user;

    friend bool operator==(const RenderedPrompt&, const RenderedPrompt&) = default;
};

/// A system message plus a user template with `{name}` placeholders.
///
/// Placeholder syntax is `{` + [a-z_]+ + `}`. Any other brace usage is
/// literal text. Substituted payloads are never rescanned.
class PromptTemplate {
public:
    /// Throws TemplateError unless each required placeholder occurs exactly
    /// once and no other placeholder occurs.
    PromptTemplate(std::string system_text, std::string user_template,
                   std::set<std::string> required_placeholders);

    const std::string& system_text() const noexcept { return system_text_; }
    const std::string& user_template() const noexcept { return user_template_; }
    const std::set<std::string>& required_placeholders() const noexcept { return required_; }

    /// Throws MissingField for a blank or absent payload.
    RenderedPrompt render(const std::map<std::string, std::string_view>& payloads) const;

private:
    std::string system_text_;
    std::string user_template_;
    std::set<std::string> required_;
};

struct PromptTemplates {
    PromptTemplate feedback;
    PromptTemplate judge;
    std::string version;
};

/// The built-in `dart-intro` set, compiled from templates/dart-intro.
const PromptTemplates& default_templates();

/// Reads VERSION, feedback.{system,user}.txt and judge.{system,user}.txt from
/// `dir`. A single trailing LF is dropped from each file.
PromptTemplates load_templates(const std::filesystem::path& dir);

/// Three lines "(N) <description>" in rubric order, LF-separated.
std::string criteria_block();

RenderedPrompt render_feedback_prompt(const PromptTemplates& templates,
                                      const HelpRequest& request);

RenderedPrompt render_judge_prompt(const PromptTemplates& templates, const HelpRequest& request,
                                   std::string_view feedback,
                                   std::string_view generator_name = kDefaultGeneratorName);

}  // namespace fbjudge
