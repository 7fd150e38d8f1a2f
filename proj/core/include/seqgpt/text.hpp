#pragma once

#include <string>
#include <string_view>
#include <vector>

// ASCII-only helpers; non-ASCII bytes pass through untouched.
namespace seqgpt::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Trim, lowercase and collapse internal whitespace runs to one space.
std::string normalize(std::string_view s);

std::vector<std::string> split_words(std::string_view s);

bool starts_with_upper(std::string_view s);

}  // namespace seqgpt::text
