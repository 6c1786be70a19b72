/// @file rubric.hpp
/// @brief The three binary feedback criteria and their fixed order.

#pragma once

#include <array>
#include <string_view>

namespace fbjudge {

/// Order is significant: it is the numbering used in the judge prompt and in
/// the "(N): Yes/No" answers.
enum class Criterion { completeness = 0, perceptivity = 1, selectivity = 2 };

inline constexpr std::array<Criterion, 3> kCriteria = {
    Criterion::completeness, Criterion::perceptivity, Criterion::selectivity};

/// 1-based number shown to the judge.
constexpr int criterion_number(Criterion c) noexcept { return static_cast<int>(c) + 1; }

constexpr std::string_view criterion_name(Criterion c) noexcept {
    switch (c) {
        case Criterion::completeness: return "completeness";
        case Criterion::perceptivity: return "perceptivity";
        case Criterion::selectivity: return "selectivity";
    }
    return "";
}

constexpr std::string_view criterion_description(Criterion c) noexcept {
    switch (c) {
        case Criterion::completeness: return "Identifies and mentions all actual issues";
        case Criterion::perceptivity: return "Identifies and mentions at least one actual issue";
        case Criterion::selectivity: return "Does not identify non-existent issues";
    }
    return "";
}

struct CriteriaLabels {
    bool completeness = false;
    bool perceptivity = false;
    bool selectivity = false;

    constexpr bool get(Criterion c) const noexcept {
        switch (c) {
            case Criterion::completeness: return completeness;
            case Criterion::perceptivity: return perceptivity;
            case Criterion::selectivity: return selectivity;
        }
        return false;
    }

    constexpr void set(Criterion c, bool v) noexcept {
        switch (c) {
            case Criterion::completeness: completeness = v; break;
            case Criterion::perceptivity: perceptivity = v; break;
            case Criterion::selectivity: selectivity = v; break;
        }
    }

    /// Complete but not perceptive: "all issues" without "at least one".
    constexpr bool contradicts_rubric() const noexcept { return completeness && !perceptivity; }

    /// All three criteria hold.
    constexpr bool comprehensive() const noexcept {
        return completeness && perceptivity && selectivity;
    }

    /// Perceptive and selective, regardless of completeness.
    constexpr bool insightful() const noexcept { return perceptivity && selectivity; }

    friend constexpr bool operator==(const CriteriaLabels&, const CriteriaLabels&) = default;
};

}  // namespace fbjudge
