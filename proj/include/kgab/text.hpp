#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kgab::text {

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);

/// Maximal runs of ASCII alphanumerics (other bytes, e.g. UTF-8, are kept inside tokens),
/// lowercased. "has_brother" -> {"has", "brother"}.
std::vector<std::string> word_tokens(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace kgab::text
