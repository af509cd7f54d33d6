#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace texhtml::utf8 {

inline constexpr char32_t replacement_char = 0xFFFD;

struct Decoded {
  char32_t code_point = 0;
  std::size_t length = 0;  // bytes consumed, always >= 1 for non-empty input
  bool valid = true;
};

/// Decodes one code point at `pos`. Malformed sequences consume one byte and
/// yield U+FFFD with `valid == false`.
Decoded decode(std::string_view text, std::size_t pos);

void append(std::string& out, char32_t cp);
std::string encode(char32_t cp);

std::size_t length(std::string_view text);

/// Lowercases the common alphabetic blocks (Latin, Latin-1, Latin Extended-A,
/// Greek, Cyrillic). Other code points pass through.
char32_t fold_case(char32_t cp);

/// Replaces malformed byte sequences with U+FFFD.
std::string sanitize(std::string_view text);

/// First `max_code_points` code points of `text`.
std::string truncate(std::string_view text, std::size_t max_code_points);

}  // namespace texhtml::utf8
