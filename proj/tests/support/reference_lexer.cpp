#include "reference_lexer.hpp"

namespace oracle {

namespace {

bool letter(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

const char* category_of(unsigned char c) {
  switch (c) {
    case '{': return "begin-group";
    case '}': return "end-group";
    case '$': return "math-shift";
    case '&': return "alignment";
    case '^': return "superscript";
    case '_': return "subscript";
    default: return letter(c) ? "letter" : "other";
  }
}

std::size_t utf8_width(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0) return 2;
  if ((lead & 0xF0) == 0xE0) return 3;
  return 4;
}

}  // namespace

std::vector<RefToken> reference_tokenize(std::string_view in) {
  // CRLF and lone CR become LF.
  std::string src;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] == '\r') {
      src += '\n';
      if (i + 1 < in.size() && in[i + 1] == '\n') ++i;
    } else {
      src += in[i];
    }
  }

  std::vector<RefToken> out;
  // 'N' new line, 'M' middle of line, 'S' skipping blanks
  char state = 'N';
  auto push_char = [&](std::string value, const char* cat) {
    out.push_back(RefToken{RefToken::chr, std::move(value), cat, 0});
  };
  auto push_par = [&] {
    while (!out.empty() && out.back().kind == RefToken::chr && out.back().category == "space") out.pop_back();
    if (!out.empty() && out.back().kind != RefToken::par) out.push_back(RefToken{RefToken::par, "", "", 0});
  };

  std::size_t i = 0;
  while (i < src.size()) {
    const unsigned char c = static_cast<unsigned char>(src[i]);
    if (c == '\\') {
      ++i;
      if (i == src.size()) break;  // dropped
      const unsigned char n = static_cast<unsigned char>(src[i]);
      std::string name;
      if (letter(n)) {
        while (i < src.size() && letter(static_cast<unsigned char>(src[i]))) name += src[i++];
        state = 'S';
      } else if (n == '\n') {
        name = " ";
        ++i;
        state = 'N';
      } else {
        const std::size_t w = utf8_width(n);
        name = src.substr(i, w);
        i += w;
        state = (n == ' ' || n == '\t') ? 'S' : 'M';
      }
      out.push_back(RefToken{RefToken::cs, name, "", 0});
      continue;
    }
    if (c == '%') {
      while (i < src.size() && src[i] != '\n') ++i;
      ++i;
      state = 'N';
      continue;
    }
    if (c == '\n') {
      ++i;
      if (state == 'N') {
        push_par();
      } else if (state == 'M') {
        push_char(" ", "space");
      }
      state = 'N';
      continue;
    }
    if (c == ' ' || c == '\t') {
      ++i;
      if (state == 'M') {
        push_char(" ", "space");
        state = 'S';
      }
      continue;
    }
    if (c == '#') {
      ++i;
      state = 'M';
      if (i < src.size() && src[i] >= '1' && src[i] <= '9') {
        out.push_back(RefToken{RefToken::param, "", "", src[i] - '0'});
        ++i;
      } else {
        if (i < src.size() && src[i] == '#') ++i;
        push_char("#", "parameter");
      }
      continue;
    }
    if (c == 0 || c == 0x7f) {
      ++i;
      continue;
    }
    const std::size_t w = utf8_width(c);
    push_char(src.substr(i, w), category_of(c));
    i += w;
    state = 'M';
  }
  return out;
}

std::string serialize(const std::vector<RefToken>& tokens) {
  std::string out;
  for (const RefToken& t : tokens) {
    switch (t.kind) {
      case RefToken::cs: out += "CS " + t.text; break;
      case RefToken::chr: out += "CH " + t.category + " " + (t.text == "\n" ? "\\n" : t.text); break;
      case RefToken::param: out += "PA " + std::to_string(t.index); break;
      case RefToken::par: out += "PAR"; break;
    }
    out += '\n';
  }
  return out;
}

std::vector<RefToken> from_tokens(std::span<const texhtml::Token> tokens) {
  std::vector<RefToken> out;
  for (const texhtml::Token& t : tokens) {
    switch (t.kind) {
      case texhtml::TokenKind::control_sequence: out.push_back({RefToken::cs, t.text, "", 0}); break;
      case texhtml::TokenKind::character:
        out.push_back({RefToken::chr, t.text, std::string(texhtml::to_string(t.category)), 0});
        break;
      case texhtml::TokenKind::parameter: out.push_back({RefToken::param, "", "", t.param_index}); break;
      case texhtml::TokenKind::paragraph_break: out.push_back({RefToken::par, "", "", 0}); break;
    }
  }
  return out;
}

}  // namespace oracle
