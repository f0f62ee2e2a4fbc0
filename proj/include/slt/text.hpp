#pragma once

// UTF-8 helpers shared by the parsers and metrics. All strings in the
// library are UTF-8; code points are the unit of "character".

#include <string>
#include <string_view>
#include <vector>

namespace slt::text {

std::vector<char32_t> decode(std::string_view utf8);
std::string encode(char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

std::size_t length(std::string_view utf8);

// Canonical composition (NFC).
std::string nfc(std::string_view utf8);

// Locale-aware full lowercasing; `language` is a BCP-47-style tag.
std::string lowercase(std::string_view utf8, std::string_view language = {});
char32_t lowercase(char32_t cp);

bool is_space(char32_t cp);
bool is_alnum(char32_t cp);
bool is_letter(char32_t cp);
bool is_digit(char32_t cp);
// Punctuation and symbol categories (P*, S*).
bool is_punct(char32_t cp);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char delim);
std::vector<std::string> split_whitespace(std::string_view s);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);
// Strict decimal parse of the whole field; returns false on junk.
bool parse_double(std::string_view field, double& out);

std::string read_file(const std::string& path);
std::vector<std::string> read_lines(const std::string& path);

}  // namespace slt::text
