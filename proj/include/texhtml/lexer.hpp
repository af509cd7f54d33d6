#pragma once

// TeX lexing with a static category-code table.
//
// The table is fixed for the whole run: \catcode assignments are reported
// as diagnostics and otherwise ignored. Verbatim environments, \verb and
// URL-like arguments are read raw (every character becomes an `other` token)
// so their content survives untouched.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "texhtml/diagnostics.hpp"

namespace texhtml {

enum class CatCode : std::uint8_t {
  escape,
  begin_group,
  end_group,
  math_shift,
  alignment,
  end_of_line,
  parameter,
  superscript,
  subscript,
  ignored,
  space,
  letter,
  other,
  comment,
  invalid,
};

std::string_view to_string(CatCode cat);

class CatcodeTable {
 public:
  /// Everything maps to `other`; use default_table() for LaTeX conventions.
  CatcodeTable();

  static const CatcodeTable& default_table();

  CatCode category(char32_t cp) const;
  void set(char32_t cp, CatCode cat);

 private:
  std::array<CatCode, 128> ascii_{};
  std::unordered_map<char32_t, CatCode> extended_;
};

enum class TokenKind : std::uint8_t { control_sequence, character, parameter, paragraph_break };

struct Token {
  TokenKind kind = TokenKind::character;
  std::string text;                  // control-sequence name, or the UTF-8 character
  CatCode category = CatCode::other; // meaningful for characters only
  int param_index = 0;               // 1..9 for parameters
  SourceLocation location;

  static Token control_sequence(std::string name, SourceLocation loc = {});
  static Token character(std::string value, CatCode cat, SourceLocation loc = {});
  static Token parameter(int index, SourceLocation loc = {});
  static Token paragraph_break(SourceLocation loc = {});

  bool is_cs() const { return kind == TokenKind::control_sequence; }
  bool is_cs(std::string_view name) const { return is_cs() && text == name; }
  bool is_char() const { return kind == TokenKind::character; }
  bool is_char(CatCode cat) const { return is_char() && category == cat; }
  bool is_char(CatCode cat, std::string_view value) const { return is_char(cat) && text == value; }
  bool is_space() const { return is_char(CatCode::space); }
  bool is_par() const { return kind == TokenKind::paragraph_break; }
  bool is_begin_group() const { return is_char(CatCode::begin_group); }
  bool is_end_group() const { return is_char(CatCode::end_group); }

  // Location is not part of token identity.
  friend bool operator==(const Token& a, const Token& b);
};

using TokenList = std::vector<Token>;

/// Human-readable form used in test failure output.
std::string debug_string(const Token& token);
std::string debug_string(std::span<const Token> tokens);

struct LexerOptions {
  std::vector<std::string> verbatim_environments{"verbatim", "verbatim*"};
  std::vector<std::string> raw_argument_commands{"url", "href"};
};

struct LexResult {
  TokenList tokens;
  Diagnostics diagnostics;
};

/// Total: every input produces a token list; problems become diagnostics.
LexResult tokenize(std::string_view source, const CatcodeTable& table = CatcodeTable::default_table(),
                   const LexerOptions& options = {});

/// Renders tokens back to source text. Control words get a separating space
/// when the next token is a letter.
std::string detokenize(std::span<const Token> tokens);

}  // namespace texhtml
