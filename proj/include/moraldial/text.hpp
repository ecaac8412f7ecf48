#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace moraldial::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool icontains(std::string_view haystack, std::string_view needle);
std::vector<std::string> split(std::string_view s, char delimiter);
std::vector<std::string> split_any(std::string_view s, std::string_view delimiters);

/// Upper-cases the first letter.
std::string capitalize(std::string_view s);
/// Lower-cases the first letter unless the sentence opens with the pronoun "I".
std::string lower_leading(std::string_view s);
/// Drops trailing whitespace and sentence punctuation (. ! ?).
std::string strip_terminal_punctuation(std::string_view s);
/// True when the string ends in . ! or ?
bool ends_sentence(std::string_view s);

/// Whitespace-delimited token count.
std::size_t word_count(std::string_view s);

std::uint64_t fnv1a64(std::string_view s);
std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::string& path);

}  // namespace moraldial::text
