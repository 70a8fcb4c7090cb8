#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace parablock::utf8 {

// Decodes one code point starting at `pos`, advancing `pos`. Returns nullopt
// (and advances by one byte) on an invalid or truncated sequence.
std::optional<char32_t> decode(std::string_view text, std::size_t& pos);

void append(std::string& out, char32_t cp);

bool is_valid(std::string_view text);

// Simple (one-to-one) Unicode case mapping covering Latin, Greek and
// Cyrillic blocks. Code points outside those ranges map to themselves.
char32_t to_lower(char32_t cp);
char32_t to_upper(char32_t cp);

std::string fold_case(std::string_view text);
std::string to_upper(std::string_view text);
// First code point upper-cased, the rest lower-cased.
std::string capitalize(std::string_view text);

bool is_space(char32_t cp);
bool is_punctuation(char32_t cp);

}  // namespace parablock::utf8
