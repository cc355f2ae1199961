#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace groundwork::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
bool starts_with_icase(std::string_view s, std::string_view prefix);
bool ends_with_icase(std::string_view s, std::string_view suffix);

// Splits on ASCII whitespace, dropping empty pieces.
std::vector<std::string> split_words(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Case-folded, punctuation-stripped form with single spaces between words.
// Used wherever two human-written titles are compared for equality.
std::string normalize_title(std::string_view s);

// Lower-case alphanumeric tokens (ASCII letters/digits; other bytes separate).
std::vector<std::string> tokenize(std::string_view s);

// Fixed-point rendering, e.g. format_fixed(0.8215, 2) == "0.82".
std::string format_fixed(double value, int decimals);

// Shortest decimal text that parses back to the same double.
std::string format_shortest(double value);

}  // namespace groundwork::text
