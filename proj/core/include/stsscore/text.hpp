#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace stsscore::text {

// Invalid UTF-8 sequences decode to U+FFFD.
std::u32string to_u32(std::string_view utf8);
std::string to_utf8(std::u32string_view text);
void append_utf8(std::string& out, char32_t cp);

std::string nfc(std::string_view utf8);
std::u32string nfd(std::u32string_view text);

// Full per-code-point lowercase mapping (no context-dependent rules).
std::u32string lowercase(std::u32string_view text);

std::string_view trim(std::string_view utf8);
bool is_blank(std::string_view utf8);
std::size_t char_count(std::string_view utf8);

bool is_white_space(char32_t cp);  // Unicode White_Space property
bool is_letter(char32_t cp);       // L*
bool is_number(char32_t cp);       // N*
bool is_punctuation(char32_t cp);  // P*
bool is_nonspacing_mark(char32_t cp);
bool is_other(char32_t cp);        // Cc, Cf, Cn, Co

}  // namespace stsscore::text
