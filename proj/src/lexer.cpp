#include "texhtml/lexer.hpp"

#include <algorithm>
#include <sstream>

#include "texhtml/utf8.hpp"

namespace texhtml {

std::string_view to_string(CatCode cat) {
  switch (cat) {
    case CatCode::escape: return "escape";
    case CatCode::begin_group: return "begin-group";
    case CatCode::end_group: return "end-group";
    case CatCode::math_shift: return "math-shift";
    case CatCode::alignment: return "alignment";
    case CatCode::end_of_line: return "end-of-line";
    case CatCode::parameter: return "parameter";
    case CatCode::superscript: return "superscript";
    case CatCode::subscript: return "subscript";
    case CatCode::ignored: return "ignored";
    case CatCode::space: return "space";
    case CatCode::letter: return "letter";
    case CatCode::other: return "other";
    case CatCode::comment: return "comment";
    case CatCode::invalid: return "invalid";
  }
  return "other";
}

CatcodeTable::CatcodeTable() { ascii_.fill(CatCode::other); }

const CatcodeTable& CatcodeTable::default_table() {
  static const CatcodeTable table = [] {
    CatcodeTable t;
    for (char32_t c = U'a'; c <= U'z'; ++c) t.set(c, CatCode::letter);
    for (char32_t c = U'A'; c <= U'Z'; ++c) t.set(c, CatCode::letter);
    t.set(U'\\', CatCode::escape);
    t.set(U'{', CatCode::begin_group);
    t.set(U'}', CatCode::end_group);
    t.set(U'$', CatCode::math_shift);
    t.set(U'&', CatCode::alignment);
    t.set(U'\n', CatCode::end_of_line);
    t.set(U'#', CatCode::parameter);
    t.set(U'^', CatCode::superscript);
    t.set(U'_', CatCode::subscript);
    t.set(U'\0', CatCode::ignored);
    t.set(U' ', CatCode::space);
    t.set(U'\t', CatCode::space);
    t.set(U'%', CatCode::comment);
    t.set(U'\x7f', CatCode::invalid);
    return t;
  }();
  return table;
}

CatCode CatcodeTable::category(char32_t cp) const {
  if (cp < ascii_.size()) return ascii_[cp];
  const auto it = extended_.find(cp);
  return it == extended_.end() ? CatCode::other : it->second;
}

void CatcodeTable::set(char32_t cp, CatCode cat) {
  if (cp < ascii_.size()) {
    ascii_[cp] = cat;
  } else {
    extended_[cp] = cat;
  }
}

Token Token::control_sequence(std::string name, SourceLocation loc) {
  Token t;
  t.kind = TokenKind::control_sequence;
  t.text = std::move(name);
  t.category = CatCode::escape;
  t.location = loc;
  return t;
}

Token Token::character(std::string value, CatCode cat, SourceLocation loc) {
  Token t;
  t.kind = TokenKind::character;
  t.text = std::move(value);
  t.category = cat;
  t.location = loc;
  return t;
}

Token Token::parameter(int index, SourceLocation loc) {
  Token t;
  t.kind = TokenKind::parameter;
  t.param_index = index;
  t.category = CatCode::parameter;
  t.location = loc;
  return t;
}

Token Token::paragraph_break(SourceLocation loc) {
  Token t;
  t.kind = TokenKind::paragraph_break;
  t.category = CatCode::end_of_line;
  t.location = loc;
  return t;
}

bool operator==(const Token& a, const Token& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case TokenKind::control_sequence: return a.text == b.text;
    case TokenKind::character: return a.text == b.text && a.category == b.category;
    case TokenKind::parameter: return a.param_index == b.param_index;
    case TokenKind::paragraph_break: return true;
  }
  return false;
}

std::string debug_string(const Token& token) {
  switch (token.kind) {
    case TokenKind::control_sequence: return "CS(" + token.text + ")";
    case TokenKind::character: {
      std::string value = token.text == "\n" ? "\\n" : token.text;
      return "Char('" + value + "'," + std::string(to_string(token.category)) + ")";
    }
    case TokenKind::parameter: return "Param(" + std::to_string(token.param_index) + ")";
    case TokenKind::paragraph_break: return "ParBreak";
  }
  return "?";
}

std::string debug_string(std::span<const Token> tokens) {
  std::string out = "[";
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ", ";
    out += debug_string(tokens[i]);
  }
  return out + "]";
}

namespace {

std::string normalize_newlines(std::string_view source) {
  std::string out;
  out.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (source[i] == '\r') {
      out.push_back('\n');
      if (i + 1 < source.size() && source[i + 1] == '\n') ++i;
    } else {
      out.push_back(source[i]);
    }
  }
  return out;
}

class Lexer {
 public:
  Lexer(std::string_view source, const CatcodeTable& table, const LexerOptions& options)
      : text_(normalize_newlines(source)), table_(table), options_(options) {}

  LexResult run() {
    while (!at_end()) step();
    if (invalid_bytes_ > 0) {
      report(result_.diagnostics, Severity::warning, Stage::lexer, "invalid-utf8",
             std::to_string(invalid_bytes_) + " malformed UTF-8 byte(s) replaced with U+FFFD",
             first_invalid_);
    }
    return std::move(result_);
  }

 private:
  enum class State { new_line, mid_line, skip_blanks };

  struct Peeked {
    char32_t cp = 0;
    std::size_t length = 0;
    bool valid = true;
  };

  bool at_end() const { return pos_ >= text_.size(); }

  Peeked peek(std::size_t at) const {
    const auto d = utf8::decode(text_, at);
    return {d.code_point, d.length, d.valid};
  }

  Peeked peek() const { return peek(pos_); }

  // Consumes one code point, updating line/column.
  char32_t advance() {
    const Peeked p = peek();
    if (!p.valid) {
      if (invalid_bytes_ == 0) first_invalid_ = here();
      ++invalid_bytes_;
    }
    pos_ += p.length;
    if (p.cp == U'\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return p.cp;
  }

  SourceLocation here() const { return {line_, column_}; }

  CatCode cat(char32_t cp) const { return table_.category(cp); }

  void emit(Token token) { result_.tokens.push_back(std::move(token)); }

  void emit_char(char32_t cp, CatCode category, SourceLocation loc) {
    emit(Token::character(utf8::encode(cp), category, loc));
  }

  void emit_par(SourceLocation loc) {
    auto& toks = result_.tokens;
    while (!toks.empty() && toks.back().is_space()) toks.pop_back();
    if (toks.empty() || toks.back().is_par()) return;
    emit(Token::paragraph_break(loc));
  }

  void warn(std::string code, std::string message, SourceLocation loc) {
    report(result_.diagnostics, Severity::warning, Stage::lexer, std::move(code), std::move(message),
           loc);
  }

  void step() {
    const SourceLocation loc = here();
    const char32_t cp = advance();
    switch (cat(cp)) {
      case CatCode::escape: control_sequence(loc); break;
      case CatCode::space:
        if (state_ == State::mid_line) {
          emit_char(U' ', CatCode::space, loc);
          state_ = State::skip_blanks;
        }
        break;
      case CatCode::end_of_line:
        if (state_ == State::new_line) {
          emit_par(loc);
        } else if (state_ == State::mid_line) {
          emit_char(U' ', CatCode::space, loc);
        }
        state_ = State::new_line;
        break;
      case CatCode::comment:
        while (!at_end() && advance() != U'\n') {
        }
        state_ = State::new_line;
        break;
      case CatCode::parameter: parameter(cp, loc); break;
      case CatCode::ignored: break;
      case CatCode::invalid:
        warn("invalid-character", "invalid character dropped", loc);
        break;
      default:
        emit_char(cp, cat(cp), loc);
        state_ = State::mid_line;
        break;
    }
  }

  void parameter(char32_t cp, SourceLocation loc) {
    state_ = State::mid_line;
    if (!at_end()) {
      const Peeked next = peek();
      if (next.cp >= U'1' && next.cp <= U'9') {
        advance();
        emit(Token::parameter(static_cast<int>(next.cp - U'0'), loc));
        return;
      }
      if (cat(next.cp) == CatCode::parameter) {
        advance();
        emit_char(cp, CatCode::parameter, loc);
        return;
      }
    }
    warn("stray-parameter", "parameter character not followed by a digit 1-9", loc);
    emit_char(cp, CatCode::parameter, loc);
  }

  void control_sequence(SourceLocation loc) {
    if (at_end()) {
      warn("escape-at-end", "escape character at end of input dropped", loc);
      return;
    }
    std::string name;
    const char32_t first = advance();
    if (cat(first) == CatCode::letter) {
      utf8::append(name, first);
      while (!at_end() && cat(peek().cp) == CatCode::letter) utf8::append(name, advance());
      state_ = State::skip_blanks;
    } else if (cat(first) == CatCode::end_of_line) {
      name = " ";
      state_ = State::new_line;
    } else {
      utf8::append(name, first);
      state_ = cat(first) == CatCode::space ? State::skip_blanks : State::mid_line;
    }
    if (name == "catcode") {
      warn("catcode-unsupported", "\\catcode changes are not supported; table is fixed", loc);
    }
    emit(Token::control_sequence(name, loc));

    if (name == "verb") {
      verb();
    } else if (name == "begin") {
      maybe_verbatim_environment();
    } else if (std::find(options_.raw_argument_commands.begin(), options_.raw_argument_commands.end(),
                         name) != options_.raw_argument_commands.end()) {
      raw_argument();
    }
  }

  void verb() {
    if (!at_end() && peek().cp == U'*') emit_char(advance(), CatCode::other, here());
    const SourceLocation start = here();
    if (at_end() || peek().cp == U'\n') {
      warn("verb-unterminated", "\\verb without a delimiter", start);
      return;
    }
    const char32_t delim = advance();
    emit_char(delim, CatCode::other, start);
    state_ = State::mid_line;
    while (!at_end() && peek().cp != U'\n') {
      const SourceLocation loc = here();
      const char32_t cp = advance();
      emit_char(cp, CatCode::other, loc);
      if (cp == delim) return;
    }
    warn("verb-unterminated", "\\verb content runs to end of line", start);
  }

  // After \url{ or \href{: read the braced argument without interpreting
  // comment, parameter or escape characters. "#<digit>" stays a parameter so
  // macro bodies can forward URLs.
  void raw_argument() {
    std::size_t probe = pos_;
    while (probe < text_.size() && cat(peek(probe).cp) == CatCode::space) probe += peek(probe).length;
    if (probe >= text_.size() || cat(peek(probe).cp) != CatCode::begin_group) return;
    while (pos_ < probe) advance();
    emit_char(advance(), CatCode::begin_group, here());
    state_ = State::mid_line;
    int depth = 1;
    while (!at_end()) {
      const SourceLocation loc = here();
      const char32_t cp = advance();
      const CatCode c = cat(cp);
      if (c == CatCode::end_of_line) continue;
      if (c == CatCode::begin_group) {
        ++depth;
      } else if (c == CatCode::end_group && --depth == 0) {
        emit_char(cp, CatCode::end_group, loc);
        return;
      }
      if (c == CatCode::parameter && !at_end() && peek().cp >= U'1' && peek().cp <= U'9') {
        emit(Token::parameter(static_cast<int>(advance() - U'0'), loc));
        continue;
      }
      emit_char(cp, CatCode::other, loc);
    }
    warn("raw-argument-unterminated", "unterminated raw argument", here());
  }

  void maybe_verbatim_environment() {
    std::size_t probe = pos_;
    while (probe < text_.size() && cat(peek(probe).cp) == CatCode::space) probe += peek(probe).length;
    if (probe >= text_.size() || cat(peek(probe).cp) != CatCode::begin_group) return;
    const std::size_t name_start = probe + 1;
    const std::size_t close = text_.find('}', name_start);
    if (close == std::string::npos) return;
    const std::string name = text_.substr(name_start, close - name_start);
    if (std::find(options_.verbatim_environments.begin(), options_.verbatim_environments.end(), name) ==
        options_.verbatim_environments.end()) {
      return;
    }
    // Lex "{name}" normally, then the body raw.
    while (pos_ < probe) advance();
    while (pos_ <= close) {
      const SourceLocation loc = here();
      const char32_t cp = advance();
      emit_char(cp, cat(cp) == CatCode::letter ? CatCode::letter : cat(cp), loc);
    }
    const std::string terminator = "\\end{" + name + "}";
    std::size_t end = text_.find(terminator, pos_);
    if (end == std::string::npos) {
      warn("verbatim-unterminated", "verbatim environment '" + name + "' is not closed", here());
      end = text_.size();
    }
    while (pos_ < end) {
      const SourceLocation loc = here();
      emit_char(advance(), CatCode::other, loc);
    }
    state_ = State::mid_line;
  }

  std::string text_;
  const CatcodeTable& table_;
  const LexerOptions& options_;
  LexResult result_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
  State state_ = State::new_line;
  std::size_t invalid_bytes_ = 0;
  SourceLocation first_invalid_;
};

bool is_ascii_letters(std::string_view name) {
  return !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  });
}

}  // namespace

LexResult tokenize(std::string_view source, const CatcodeTable& table, const LexerOptions& options) {
  return Lexer(source, table, options).run();
}

std::string detokenize(std::span<const Token> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    switch (t.kind) {
      case TokenKind::control_sequence:
        out += '\\';
        out += t.text;
        if (is_ascii_letters(t.text) && i + 1 < tokens.size() && tokens[i + 1].is_char(CatCode::letter)) {
          out += ' ';
        }
        break;
      case TokenKind::character: out += t.text; break;
      case TokenKind::parameter: out += '#' + std::to_string(t.param_index); break;
      case TokenKind::paragraph_break: out += "\n\n"; break;
    }
  }
  return out;
}

}  // namespace texhtml
