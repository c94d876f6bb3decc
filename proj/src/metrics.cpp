#include "kgab/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "kgab/errors.hpp"

namespace kgab {

namespace {

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

bool contains_run(std::span<const std::string> haystack, std::span<const std::string> needle) {
    if (needle.empty()) return false;
    return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) != haystack.end();
}

}  // namespace

std::vector<std::string> normalize_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        const auto start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        auto token = text.substr(start, i - start);
        while (!token.empty() && is_punct(token.front())) token.remove_prefix(1);
        while (!token.empty() && is_punct(token.back())) token.remove_suffix(1);
        if (token.empty()) continue;
        std::string lowered(token);
        for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        tokens.push_back(std::move(lowered));
    }
    return tokens;
}

namespace {

bool matches_tokens(std::span<const std::string> output, const AnswerEntity& answer, const MatchOptions& options) {
    if (contains_run(output, normalize_tokens(answer.label))) return true;
    if (!options.use_aliases) return false;
    return std::any_of(answer.aliases.begin(), answer.aliases.end(),
                       [&](const std::string& alias) { return contains_run(output, normalize_tokens(alias)); });
}

std::vector<std::string> output_tokens(std::string_view output, const MatchOptions& options) {
    auto tokens = normalize_tokens(output);
    if (tokens.size() > options.max_output_tokens) tokens.resize(options.max_output_tokens);
    return tokens;
}

}  // namespace

bool match_answer(std::string_view output, const AnswerEntity& answer, const MatchOptions& options) {
    return matches_tokens(output_tokens(output, options), answer, options);
}

QuestionScore score_question(std::string_view output, const AnswerSet& answers, const MatchOptions& options) {
    if (answers.empty()) throw InputError("answer set is empty");
    const auto tokens = output_tokens(output, options);
    QuestionScore score;
    for (std::size_t i = 0; i < answers.size(); ++i) {
        if (matches_tokens(tokens, answers[i], options)) score.matched.push_back(i);
    }
    score.accuracy = static_cast<double>(score.matched.size()) / static_cast<double>(answers.size());
    score.hit = score.matched.empty() ? 0 : 1;
    return score;
}

double round2(double x) noexcept { return std::round(x * 100.0) / 100.0; }

Aggregate aggregate(std::span<const QuestionScore> scores) {
    if (scores.empty()) throw InputError("cannot aggregate an empty score list");
    double acc = 0.0;
    long hits = 0;
    for (const auto& s : scores) {
        acc += s.accuracy;
        hits += s.hit;
    }
    const auto n = static_cast<double>(scores.size());
    return {round2(acc / n * 100.0), round2(static_cast<double>(hits) / n * 100.0)};
}

std::optional<double> relative_drop(double baseline_percent, double value_percent) {
    if (!(baseline_percent > 0.0)) return std::nullopt;
    return round2((baseline_percent - value_percent) / baseline_percent * 100.0);
}

std::string format_cell(double value_percent, std::optional<double> baseline_percent) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", value_percent);
    std::string cell = buf;
    if (!baseline_percent) return cell;
    const auto drop = relative_drop(*baseline_percent, value_percent);
    if (!drop) return cell + " (n/a)";
    std::snprintf(buf, sizeof buf, " (%c%.2f%%)", *drop >= 0.0 ? '-' : '+', std::fabs(*drop));
    return cell + buf;
}

}  // namespace kgab
