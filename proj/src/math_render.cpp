#include "texhtml/math_render.hpp"

#include <algorithm>
#include <unordered_map>
#include <vector>

#include "texhtml/lexer.hpp"

namespace texhtml {

std::string escape_html(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c; break;
    }
  }
  return out;
}

namespace {

const std::unordered_map<std::string_view, std::string_view>& greek() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"alpha", "α"},   {"beta", "β"},     {"gamma", "γ"},   {"delta", "δ"},  {"epsilon", "ϵ"},
      {"varepsilon", "ε"}, {"zeta", "ζ"},  {"eta", "η"},     {"theta", "θ"},  {"vartheta", "ϑ"},
      {"iota", "ι"},    {"kappa", "κ"},    {"lambda", "λ"},  {"mu", "μ"},     {"nu", "ν"},
      {"xi", "ξ"},      {"pi", "π"},       {"varpi", "ϖ"},   {"rho", "ρ"},    {"varrho", "ϱ"},
      {"sigma", "σ"},   {"varsigma", "ς"}, {"tau", "τ"},     {"upsilon", "υ"}, {"phi", "ϕ"},
      {"varphi", "φ"},  {"chi", "χ"},      {"psi", "ψ"},     {"omega", "ω"},  {"Gamma", "Γ"},
      {"Delta", "Δ"},   {"Theta", "Θ"},    {"Lambda", "Λ"},  {"Xi", "Ξ"},     {"Pi", "Π"},
      {"Sigma", "Σ"},   {"Upsilon", "Υ"},  {"Phi", "Φ"},     {"Psi", "Ψ"},    {"Omega", "Ω"},
      {"ell", "ℓ"},     {"hbar", "ℏ"},     {"infty", "∞"},   {"partial", "∂"}, {"nabla", "∇"},
      {"emptyset", "∅"}, {"aleph", "ℵ"},   {"Re", "ℜ"},      {"Im", "ℑ"},     {"wp", "℘"},
  };
  return table;
}

const std::unordered_map<std::string_view, std::string_view>& operators() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"pm", "±"},        {"mp", "∓"},        {"times", "×"},     {"div", "÷"},       {"cdot", "⋅"},
      {"ast", "∗"},       {"star", "⋆"},      {"circ", "∘"},      {"bullet", "∙"},    {"oplus", "⊕"},
      {"otimes", "⊗"},    {"cup", "∪"},       {"cap", "∩"},       {"wedge", "∧"},     {"land", "∧"},
      {"vee", "∨"},       {"lor", "∨"},       {"setminus", "∖"},  {"leq", "≤"},       {"le", "≤"},
      {"geq", "≥"},       {"ge", "≥"},        {"neq", "≠"},       {"ne", "≠"},        {"approx", "≈"},
      {"equiv", "≡"},     {"sim", "∼"},       {"simeq", "≃"},     {"cong", "≅"},      {"propto", "∝"},
      {"ll", "≪"},        {"gg", "≫"},        {"in", "∈"},        {"notin", "∉"},     {"ni", "∋"},
      {"subset", "⊂"},    {"supset", "⊃"},    {"subseteq", "⊆"},  {"supseteq", "⊇"},  {"to", "→"},
      {"rightarrow", "→"}, {"leftarrow", "←"}, {"gets", "←"},     {"leftrightarrow", "↔"},
      {"Rightarrow", "⇒"}, {"Leftarrow", "⇐"}, {"Leftrightarrow", "⇔"}, {"implies", "⟹"},
      {"iff", "⟺"},       {"mapsto", "↦"},    {"forall", "∀"},    {"exists", "∃"},    {"neg", "¬"},
      {"lnot", "¬"},      {"mid", "∣"},       {"parallel", "∥"},  {"perp", "⊥"},      {"ldots", "…"},
      {"cdots", "⋯"},     {"vdots", "⋮"},     {"ddots", "⋱"},     {"dots", "…"},      {"prime", "′"},
      {"langle", "⟨"},    {"rangle", "⟩"},    {"lbrace", "{"},    {"rbrace", "}"},    {"{", "{"},
      {"}", "}"},         {"|", "‖"},         {"lvert", "|"},     {"rvert", "|"},     {"lVert", "‖"},
      {"rVert", "‖"},     {"vert", "|"},      {"Vert", "‖"},      {"lfloor", "⌊"},
      {"rfloor", "⌋"},    {"lceil", "⌈"},     {"rceil", "⌉"},     {"sum", "∑"},       {"prod", "∏"},
      {"coprod", "∐"},    {"int", "∫"},       {"iint", "∬"},      {"oint", "∮"},      {"bigcup", "⋃"},
      {"bigcap", "⋂"},    {"colon", ":"},     {"%", "%"},         {"#", "#"},         {"&", "&"},
      {"_", "_"},         {"$", "$"},
  };
  return table;
}

bool is_function_name(std::string_view name) {
  static const std::vector<std::string_view> names = {
      "sin", "cos", "tan", "cot", "sec", "csc", "arcsin", "arccos", "arctan", "sinh", "cosh", "tanh",
      "log", "ln", "exp", "lim", "limsup", "liminf", "max", "min", "sup", "inf", "det", "dim",
      "ker", "deg", "gcd", "arg", "Pr", "hom"};
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::string_view font_variant(std::string_view name) {
  if (name == "mathbf" || name == "boldsymbol" || name == "bm") return "bold";
  if (name == "mathit") return "italic";
  if (name == "mathrm" || name == "operatorname") return "normal";
  if (name == "mathsf") return "sans-serif";
  if (name == "mathtt") return "monospace";
  if (name == "mathcal") return "script";
  if (name == "mathbb") return "double-struck";
  if (name == "mathfrak") return "fraktur";
  return {};
}

std::string_view space_width(std::string_view name) {
  if (name == ",") return "0.1667em";
  if (name == ":" || name == ">") return "0.2222em";
  if (name == ";") return "0.2778em";
  if (name == " ") return "0.25em";
  if (name == "quad") return "1em";
  if (name == "qquad") return "2em";
  if (name == "!") return "-0.1667em";
  return {};
}

struct Unsupported {
  std::string what;
};

constexpr int max_depth = 128;

class MathParser {
 public:
  explicit MathParser(const TokenList& tokens) : toks_(tokens) {}

  std::string run() {
    std::string row = parse_row(nullptr);
    if (pos_ < toks_.size()) fail(debug_string(toks_[pos_]));
    return row;
  }

 private:
  [[noreturn]] static void fail(std::string what) { throw Unsupported{std::move(what)}; }

  bool done() const { return pos_ >= toks_.size(); }
  const Token& peek() const { return toks_[pos_]; }

  void skip_spaces() {
    while (!done() && (peek().is_space() || peek().is_par())) ++pos_;
  }

  std::string leaf(std::string_view tag, std::string_view text) const {
    std::string out = "<";
    out += tag;
    if (!variant_.empty() && (tag == "mi" || tag == "mn")) {
      out += " mathvariant=\"";
      out += variant_;
      out += '"';
    }
    out += '>';
    out += escape_html(text);
    out += "</";
    out += tag;
    out += '>';
    return out;
  }

  static std::string wrap_row(const std::vector<std::string>& items) {
    if (items.size() == 1) return items.front();
    std::string out = "<mrow>";
    for (const auto& i : items) out += i;
    return out + "</mrow>";
  }

  // Items up to (not including) a token matching `stop`, or end of input.
  std::string parse_row(bool (*stop)(const Token&)) {
    if (++depth_ > max_depth) fail("nesting too deep");
    std::vector<std::string> items;
    while (true) {
      skip_spaces();
      if (done() || (stop != nullptr && stop(peek()))) break;
      items.push_back(parse_scripted());
    }
    --depth_;
    if (items.empty()) return "<mrow></mrow>";
    return wrap_row(items);
  }

  std::string parse_scripted() {
    std::string base = parse_atom();
    std::optional<std::string> sub;
    std::optional<std::string> sup;
    while (true) {
      skip_spaces();
      if (done()) break;
      if (peek().is_char(CatCode::superscript) && !sup) {
        ++pos_;
        sup = parse_script_argument();
      } else if (peek().is_char(CatCode::subscript) && !sub) {
        ++pos_;
        sub = parse_script_argument();
      } else if (peek().is_char(CatCode::other, "'") && !sup) {
        std::string primes;
        while (!done() && peek().is_char(CatCode::other, "'")) {
          primes += "′";
          ++pos_;
        }
        sup = "<mo>" + primes + "</mo>";
      } else {
        break;
      }
    }
    if (sub && sup) return "<msubsup>" + base + *sub + *sup + "</msubsup>";
    if (sub) return "<msub>" + base + *sub + "</msub>";
    if (sup) return "<msup>" + base + *sup + "</msup>";
    return base;
  }

  std::string parse_script_argument() {
    skip_spaces();
    if (done()) fail("script without argument");
    if (peek().is_char(CatCode::superscript) || peek().is_char(CatCode::subscript)) fail("double script");
    return parse_atom();
  }

  std::string parse_group() {
    skip_spaces();
    if (done()) fail("missing argument");
    if (!peek().is_begin_group()) return parse_atom();
    ++pos_;
    std::string row = parse_row([](const Token& t) { return t.is_end_group(); });
    if (done()) fail("unterminated group");
    ++pos_;
    return row;
  }

  std::string raw_group_text() {
    skip_spaces();
    if (done() || !peek().is_begin_group()) fail("\\text without braces");
    const std::size_t start = ++pos_;
    int depth = 1;
    for (; pos_ < toks_.size(); ++pos_) {
      if (toks_[pos_].is_begin_group()) ++depth;
      if (toks_[pos_].is_end_group() && --depth == 0) break;
    }
    if (done()) fail("unterminated group");
    std::string text;
    for (std::size_t i = start; i < pos_; ++i) {
      const Token& t = toks_[i];
      if (t.is_begin_group() || t.is_end_group()) continue;
      if (t.is_cs()) fail("\\" + t.text + " inside \\text");
      text += t.text;
    }
    ++pos_;
    return text;
  }

  std::string delimiter() {
    skip_spaces();
    if (done()) fail("missing delimiter");
    const Token& t = toks_[pos_++];
    if (t.is_char(CatCode::other, ".")) return "";
    if (t.is_char() && (t.text == "(" || t.text == ")" || t.text == "[" || t.text == "]" || t.text == "|" ||
                        t.text == "/")) {
      return "<mo>" + escape_html(t.text) + "</mo>";
    }
    if (t.is_cs()) {
      const auto op = operators().find(t.text);
      if (op != operators().end()) return "<mo>" + std::string(op->second) + "</mo>";
    }
    fail("delimiter " + debug_string(t));
  }

  std::string parse_atom() {
    if (++depth_ > max_depth) fail("nesting too deep");
    std::string out = atom();
    --depth_;
    return out;
  }

  std::string atom() {
    skip_spaces();
    if (done()) fail("unexpected end");
    const Token& t = toks_[pos_++];
    if (t.kind == TokenKind::parameter) fail("parameter token");
    if (t.is_begin_group()) {
      --pos_;
      return parse_group();
    }
    if (t.is_char(CatCode::letter)) return leaf("mi", t.text);
    if (t.is_char() && t.text.size() == 1 && t.text[0] >= '0' && t.text[0] <= '9') {
      std::string number = t.text;
      while (!done() && peek().is_char() && peek().text.size() == 1 &&
             ((peek().text[0] >= '0' && peek().text[0] <= '9') ||
              (peek().text[0] == '.' && pos_ + 1 < toks_.size() && toks_[pos_ + 1].text.size() == 1 &&
               toks_[pos_ + 1].text[0] >= '0' && toks_[pos_ + 1].text[0] <= '9'))) {
        number += toks_[pos_++].text;
      }
      return leaf("mn", number);
    }
    if (t.is_char(CatCode::other)) {
      static const std::string_view ops = "+-=<>/*,;:!?()[]|.";
      if (t.text.size() == 1 && ops.find(t.text[0]) != std::string_view::npos) {
        return "<mo>" + escape_html(t.text == "-" ? "−" : t.text) + "</mo>";
      }
      if (t.text == "~") return "<mspace width=\"0.25em\"></mspace>";
      if (t.text.size() > 1) return leaf("mi", t.text);  // non-ASCII letter
      fail("character '" + t.text + "'");
    }
    if (!t.is_cs()) fail(debug_string(t));
    return command(t);
  }

  std::string command(const Token& t) {
    const std::string& name = t.text;
    if (const auto g = greek().find(name); g != greek().end()) {
      const bool upright = !name.empty() && (name[0] >= 'A' && name[0] <= 'Z');
      if (upright && variant_.empty()) return "<mi mathvariant=\"normal\">" + std::string(g->second) + "</mi>";
      return leaf("mi", g->second);
    }
    if (const auto op = operators().find(name); op != operators().end()) {
      return "<mo>" + escape_html(op->second) + "</mo>";
    }
    if (is_function_name(name)) return "<mi>" + name + "</mi>";
    if (const auto w = space_width(name); !w.empty()) {
      return "<mspace width=\"" + std::string(w) + "\"></mspace>";
    }
    if (name == "frac" || name == "dfrac" || name == "tfrac") {
      std::string num = parse_group();
      std::string den = parse_group();
      return "<mfrac>" + num + den + "</mfrac>";
    }
    if (name == "sqrt") {
      skip_spaces();
      if (!done() && peek().is_char(CatCode::other, "[")) {
        ++pos_;
        std::string index = parse_row([](const Token& x) { return x.is_char(CatCode::other, "]"); });
        if (done()) fail("unterminated root index");
        ++pos_;
        std::string radicand = parse_group();
        return "<mroot>" + radicand + index + "</mroot>";
      }
      return "<msqrt>" + parse_group() + "</msqrt>";
    }
    if (const auto v = font_variant(name); !v.empty()) {
      const std::string saved = variant_;
      variant_ = std::string(v);
      std::string inner = parse_group();
      variant_ = saved;
      return inner;
    }
    if (name == "text" || name == "textrm" || name == "mbox" || name == "textit" || name == "textbf") {
      return "<mtext>" + escape_html(raw_group_text()) + "</mtext>";
    }
    if (name == "left") {
      std::string open = delimiter();
      std::string body = parse_row([](const Token& x) { return x.is_cs("right"); });
      if (done()) fail("\\left without \\right");
      ++pos_;
      std::string close = delimiter();
      return "<mrow>" + open + body + close + "</mrow>";
    }
    if (name == "bigl" || name == "bigr" || name == "Bigl" || name == "Bigr" || name == "big" || name == "Big") {
      return delimiter();
    }
    if (name == "displaystyle" || name == "textstyle" || name == "limits" || name == "nolimits") {
      return "<mrow></mrow>";
    }
    fail("\\" + name);
  }

  const TokenList& toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  std::string variant_;
};

}  // namespace

MathRender render_math(std::string_view tex, bool display) {
  MathRender result;
  const LexResult lexed = tokenize(tex);
  for (const Token& t : lexed.tokens) {
    if (t.is_char(CatCode::alignment) || t.is_cs("\\")) {
      result.unsupported = "multi-line alignment";
      return result;
    }
  }
  try {
    std::string body = MathParser(lexed.tokens).run();
    std::string out = "<math xmlns=\"http://www.w3.org/1998/Math/MathML\"";
    out += display ? " display=\"block\">" : ">";
    out += body;
    out += "</math>";
    result.mathml = std::move(out);
  } catch (const Unsupported& u) {
    result.unsupported = u.what;
  }
  return result;
}

}  // namespace texhtml
