#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small UTF-8 and whitespace helpers shared by the prompt, relation and
// parser modules.
namespace mtrec::text {

bool is_space(char c) noexcept;

std::string_view trim(std::string_view s) noexcept;

/// Collapses every whitespace run to one ASCII space and trims the ends.
std::string collapse_whitespace(std::string_view s);

/// Removes every whitespace byte.
std::string strip_whitespace(std::string_view s);

/// Splits on single ASCII spaces; consecutive spaces yield empty tokens.
std::vector<std::string> split_spaces(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Byte length of the UTF-8 sequence starting with `lead` (1 for invalid bytes).
std::size_t utf8_sequence_length(unsigned char lead) noexcept;

/// Splits into UTF-8 code point substrings.
std::vector<std::string_view> utf8_codepoints(std::string_view s);

/// True when `s` contains a letter: ASCII alpha or any non-ASCII code point
/// that ICU classifies as alphabetic.
bool has_letter(std::string_view s);

/// Unicode lower-casing followed by NFC normalization.
std::string fold_case_nfc(std::string_view s);

}  // namespace mtrec::text
