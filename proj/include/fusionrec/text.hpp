#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fusionrec::text {

/// Maximum tokens kept per description, matching the encoder's sequence limit.
inline constexpr std::size_t kMaxTokens = 128;

std::vector<char32_t> decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view cps);
void append_utf8(std::string& out, char32_t cp);

char32_t to_lower(char32_t cp);
bool is_separator(char32_t cp);

std::string lowercase(std::string_view s);
std::string_view trim(std::string_view s);

// Splits on Unicode whitespace and punctuation and lowercases. Tokens keep
// their original script; nothing is transliterated. At most max_tokens are
// returned.
std::vector<std::string> tokenize(std::string_view s, std::size_t max_tokens = kMaxTokens);

}  // namespace fusionrec::text
