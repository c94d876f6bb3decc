#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kgab {

/// One gold answer entity: its canonical label plus alternative surface forms.
struct AnswerEntity {
    std::string label;
    std::vector<std::string> aliases;
};

using AnswerSet = std::vector<AnswerEntity>;

struct MatchOptions {
    /// Only the first this-many normalized output tokens are scanned.
    std::size_t max_output_tokens = 512;
    /// When false only canonical labels count.
    bool use_aliases = true;
};

struct QuestionScore {
    double accuracy = 0.0;                 // |matched| / |answers|
    int hit = 0;                           // 1 iff anything matched
    std::vector<std::size_t> matched;      // indices into the AnswerSet
};

struct Aggregate {
    double accuracy_percent = 0.0;
    double hits_percent = 0.0;
};

/// Lowercase, split on whitespace, strip leading/trailing punctuation from each token,
/// drop tokens that end up empty.
std::vector<std::string> normalize_tokens(std::string_view text);

/// True iff the canonical label (or, with aliases enabled, any alias) occurs as a contiguous
/// token subsequence of the output.
bool match_answer(std::string_view output, const AnswerEntity& answer, const MatchOptions& options = {});

/// Throws InputError on an empty AnswerSet.
QuestionScore score_question(std::string_view output, const AnswerSet& answers, const MatchOptions& options = {});

/// Means x 100, rounded to 2 decimals. Throws InputError on an empty input.
Aggregate aggregate(std::span<const QuestionScore> scores);

/// (baseline - value) / baseline x 100 rounded to 2 decimals; positive means a drop.
/// nullopt when baseline <= 0.
std::optional<double> relative_drop(double baseline_percent, double value_percent);

double round2(double x) noexcept;

/// "xx.xx" for a baseline cell, "xx.xx (-y.yy%)" otherwise ("+" when the value improved,
/// "n/a" when the drop is undefined).
std::string format_cell(double value_percent, std::optional<double> baseline_percent);

}  // namespace kgab
