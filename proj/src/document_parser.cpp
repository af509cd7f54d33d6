#include <algorithm>
#include <deque>
#include <map>
#include <unordered_map>

#include "texhtml/document.hpp"
#include "texhtml/utf8.hpp"

namespace texhtml {

namespace {

using TokenSpan = std::span<const Token>;

struct Cursor {
  TokenSpan toks;
  std::size_t pos = 0;

  bool done() const { return pos >= toks.size(); }
  const Token& peek() const { return toks[pos]; }
  const Token* peek_at(std::size_t offset) const {
    return pos + offset < toks.size() ? &toks[pos + offset] : nullptr;
  }
  const Token& next() { return toks[pos++]; }
  TokenSpan rest() const { return toks.subspan(std::min(pos, toks.size())); }
};

enum class StopKind { end_of_input, end_environment, item };

struct Stop {
  StopKind kind = StopKind::end_of_input;
  bool matched = false;
  SourceLocation location;
};

struct Frame {
  Blocks* out = nullptr;  // nullptr: the document root with its section stack
  bool list_item = false;
};

const std::unordered_map<std::string_view, std::string_view>& text_symbols() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"%", "%"}, {"&", "&"}, {"$", "$"}, {"#", "#"}, {"_", "_"}, {"{", "{"}, {"}", "}"},
      {" ", " "}, {",", " "}, {";", " "}, {":", " "}, {"!", ""}, {"/", ""},
      {"-", "­"}, {"@", ""}, {"|", "‖"},
      {"textbackslash", "\\"}, {"textasciitilde", "~"}, {"textasciicircum", "^"},
      {"textunderscore", "_"}, {"textbar", "|"}, {"textless", "<"}, {"textgreater", ">"},
      {"textbraceleft", "{"}, {"textbraceright", "}"}, {"textdollar", "$"},
      {"textendash", "–"}, {"textemdash", "—"}, {"textquotedblleft", "“"},
      {"textquotedblright", "”"}, {"textquoteleft", "‘"}, {"textquoteright", "’"},
      {"textregistered", "®"}, {"texttrademark", "™"}, {"textdegree", "°"},
      {"textbullet", "•"}, {"S", "§"}, {"P", "¶"}, {"copyright", "©"},
      {"dag", "†"}, {"ddag", "‡"}, {"pounds", "£"}, {"ss", "ß"},
      {"ae", "æ"}, {"AE", "Æ"}, {"oe", "œ"}, {"OE", "Œ"}, {"o", "ø"},
      {"O", "Ø"}, {"aa", "å"}, {"AA", "Å"}, {"l", "ł"}, {"L", "Ł"},
      {"i", "ı"}, {"j", "ȷ"}, {"ldots", "…"}, {"dots", "…"},
      {"LaTeX", "LaTeX"}, {"LaTeXe", "LaTeX2ε"}, {"TeX", "TeX"}, {"quad", " "},
      {"qquad", "  "}, {"enspace", " "}, {"thinspace", " "},
  };
  return table;
}

const std::unordered_map<std::string_view, char32_t>& accents() {
  static const std::unordered_map<std::string_view, char32_t> table = {
      {"'", 0x301}, {"`", 0x300}, {"^", 0x302}, {"\"", 0x308}, {"~", 0x303}, {"=", 0x304},
      {".", 0x307}, {"c", 0x327}, {"v", 0x30C}, {"u", 0x306},  {"H", 0x30B},
  };
  return table;
}

const std::unordered_map<std::string_view, InlineStyle>& style_commands() {
  static const std::unordered_map<std::string_view, InlineStyle> table = {
      {"emph", InlineStyle::emphasis},       {"textbf", InlineStyle::bold},
      {"textit", InlineStyle::italic},       {"texttt", InlineStyle::monospace},
      {"textsc", InlineStyle::small_caps},   {"textsf", InlineStyle::sans_serif},
      {"textrm", InlineStyle::roman},        {"textup", InlineStyle::roman},
      {"textmd", InlineStyle::roman},        {"textnormal", InlineStyle::roman},
      {"textsl", InlineStyle::slanted},      {"underline", InlineStyle::underline},
      {"textsuperscript", InlineStyle::superscript}, {"textsubscript", InlineStyle::subscript},
  };
  return table;
}

const std::unordered_map<std::string_view, InlineStyle>& style_switches() {
  static const std::unordered_map<std::string_view, InlineStyle> table = {
      {"bf", InlineStyle::bold},         {"bfseries", InlineStyle::bold},
      {"it", InlineStyle::italic},       {"itshape", InlineStyle::italic},
      {"em", InlineStyle::emphasis},     {"tt", InlineStyle::monospace},
      {"ttfamily", InlineStyle::monospace}, {"sc", InlineStyle::small_caps},
      {"scshape", InlineStyle::small_caps}, {"sf", InlineStyle::sans_serif},
      {"sffamily", InlineStyle::sans_serif}, {"rm", InlineStyle::roman},
      {"rmfamily", InlineStyle::roman},  {"upshape", InlineStyle::roman},
      {"mdseries", InlineStyle::roman},  {"normalfont", InlineStyle::roman},
      {"sl", InlineStyle::slanted},      {"slshape", InlineStyle::slanted},
  };
  return table;
}

std::optional<int> section_level(std::string_view name) {
  if (name == "part" || name == "chapter" || name == "section") return 1;
  if (name == "subsection") return 2;
  if (name == "subsubsection") return 3;
  if (name == "paragraph" || name == "subparagraph") return 4;
  return std::nullopt;
}

std::optional<RefKind> ref_kind(std::string_view name) {
  if (name == "ref" || name == "autoref" || name == "cref" || name == "Cref" || name == "nameref") {
    return RefKind::plain;
  }
  if (name == "eqref") return RefKind::equation;
  if (name == "pageref") return RefKind::page;
  return std::nullopt;
}

bool is_cite(std::string_view name) {
  return name == "cite" || name == "citep" || name == "citet" || name == "citealp" ||
         name == "citeauthor" || name == "citeyear";
}

bool is_rule(std::string_view name) {
  return name == "hline" || name == "toprule" || name == "midrule" || name == "bottomrule" ||
         name == "cline" || name == "cmidrule";
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string span_text(TokenSpan toks) { return trim(detokenize(toks)); }

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = trim(text.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Index of the end-group matching the begin-group at `open`, or npos.
std::size_t matching_brace(TokenSpan toks, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < toks.size(); ++i) {
    if (toks[i].is_begin_group()) {
      ++depth;
    } else if (toks[i].is_end_group() && --depth == 0) {
      return i;
    }
  }
  return std::string::npos;
}

// "{name}" after \begin or \end at `at` (the control sequence). Returns the
// name and the index just past the closing brace.
std::optional<std::pair<std::string, std::size_t>> environment_name_at(TokenSpan toks, std::size_t at) {
  std::size_t i = at + 1;
  while (i < toks.size() && toks[i].is_space()) ++i;
  if (i >= toks.size() || !toks[i].is_begin_group()) return std::nullopt;
  std::string name;
  for (++i; i < toks.size(); ++i) {
    if (toks[i].is_end_group()) return std::make_pair(trim(name), i + 1);
    if (!toks[i].is_char() || toks[i].is_begin_group()) return std::nullopt;
    name += toks[i].text;
  }
  return std::nullopt;
}

void append_text(Inlines& out, std::string_view value) {
  if (value.empty()) return;
  if (!out.empty()) {
    if (auto* last = std::get_if<Text>(&out.back().node)) {
      last->text += value;
      return;
    }
  }
  out.push_back(Inline{Text{std::string(value)}});
}

// Collapses whitespace runs and applies TeX input ligatures.
std::string typeset(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const char c = in[i];
    if (c == ' ' && !out.empty() && out.back() == ' ') continue;
    if (c == '-' && in.substr(i, 3) == "---") {
      out += "—";
      i += 2;
    } else if (c == '-' && in.substr(i, 2) == "--") {
      out += "–";
      i += 1;
    } else if (c == '`' && in.substr(i, 2) == "``") {
      out += "“";
      i += 1;
    } else if (c == '\'' && in.substr(i, 2) == "''") {
      out += "”";
      i += 1;
    } else if (c == '`') {
      out += "‘";
    } else if (c == '\'') {
      out += "’";
    } else {
      out += c;
    }
  }
  return out;
}

void normalize(Inlines& inlines) {
  Inlines merged;
  for (Inline& item : inlines) {
    if (auto* t = std::get_if<Text>(&item.node)) {
      append_text(merged, t->text);
    } else {
      merged.push_back(std::move(item));
    }
  }
  for (Inline& item : merged) {
    if (auto* t = std::get_if<Text>(&item.node)) t->text = typeset(t->text);
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const Inline& i) {
                                const auto* t = std::get_if<Text>(&i.node);
                                return t != nullptr && t->text.empty();
                              }),
               merged.end());
  inlines = std::move(merged);
}

void trim_edges(Inlines& inlines) {
  while (!inlines.empty()) {
    auto* t = std::get_if<Text>(&inlines.front().node);
    if (t == nullptr) break;
    const auto first = t->text.find_first_not_of(' ');
    if (first == std::string::npos) {
      inlines.erase(inlines.begin());
      continue;
    }
    t->text.erase(0, first);
    break;
  }
  while (!inlines.empty()) {
    auto* t = std::get_if<Text>(&inlines.back().node);
    if (t == nullptr) break;
    const auto last = t->text.find_last_not_of(' ');
    if (last == std::string::npos) {
      inlines.pop_back();
      continue;
    }
    t->text.erase(last + 1);
    break;
  }
}

bool is_blank(const Inlines& inlines) {
  return std::all_of(inlines.begin(), inlines.end(), [](const Inline& i) {
    const auto* t = std::get_if<Text>(&i.node);
    return t != nullptr && t->text.find_first_not_of(' ') == std::string::npos;
  });
}

Inlines flatten(Blocks blocks);

void flatten_into(Block& block, Inlines& out) {
  auto space = [&] {
    if (!out.empty()) append_text(out, " ");
  };
  std::visit(
      [&](auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Paragraph>) {
          space();
          for (auto& i : node.content) out.push_back(std::move(i));
        } else if constexpr (std::is_same_v<T, Section>) {
          space();
          for (auto& i : node.title) out.push_back(std::move(i));
          for (auto& child : node.children) flatten_into(child, out);
        } else if constexpr (std::is_same_v<T, List>) {
          for (auto& item : node.items) {
            space();
            if (item.label) {
              for (auto& i : *item.label) out.push_back(std::move(i));
            }
            for (auto& child : item.content) flatten_into(child, out);
          }
        } else if constexpr (std::is_same_v<T, Figure> || std::is_same_v<T, Table>) {
          for (auto& child : node.content) flatten_into(child, out);
          if (node.caption) {
            space();
            for (auto& i : *node.caption) out.push_back(std::move(i));
          }
        } else if constexpr (std::is_same_v<T, Tabular>) {
          for (auto& row : node.rows) {
            for (auto& cell : row) {
              space();
              for (auto& i : cell) out.push_back(std::move(i));
            }
          }
        } else if constexpr (std::is_same_v<T, MathDisplay>) {
          space();
          out.push_back(Inline{MathInline{node.tex}});
        } else if constexpr (std::is_same_v<T, Quote>) {
          for (auto& child : node.children) flatten_into(child, out);
        } else if constexpr (std::is_same_v<T, Verbatim>) {
          space();
          out.push_back(Inline{Code{node.text}});
        } else if constexpr (std::is_same_v<T, UnknownEnvironment>) {
          space();
          out.push_back(Inline{UnknownCommand{node.raw}});
        }
      },
      block.node);
}

Inlines flatten(Blocks blocks) {
  Inlines out;
  for (Block& b : blocks) flatten_into(b, out);
  return out;
}

class Parser {
 public:
  Parser(TokenSpan tokens, const PackageRegistry& registry) : tokens_(tokens), registry_(registry) {
    load_handler(registry.core());
  }

  Document run() {
    std::size_t body_start = 0;
    bool has_document = false;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!tokens_[i].is_cs("begin")) continue;
      const auto env = environment_name_at(tokens_, i);
      if (env && env->first == "document") {
        preamble(tokens_.subspan(0, i));
        body_start = env->second;
        has_document = true;
        break;
      }
    }

    Cursor cur{tokens_, body_start};
    if (has_document) {
      open_envs_.push_back("document");
      const Stop stop = parse_blocks(cur, Frame{});
      if (stop.kind == StopKind::end_of_input) {
        diag(Severity::error, "unterminated-environment", "\\begin{document} is never closed",
             tokens_.empty() ? SourceLocation{} : tokens_.back().location);
      }
      open_envs_.pop_back();
    } else {
      parse_blocks(cur, Frame{});
    }
    close_sections(0);
    return std::move(doc_);
  }

 private:
  // ------------------------------------------------------------ helpers

  void diag(Severity severity, std::string code, std::string message, SourceLocation loc) {
    report(doc_.diagnostics, severity, Stage::parser, std::move(code), std::move(message), loc);
  }

  void load_handler(const PackageHandler& handler) {
    for (const MacroDef& m : handler.macros) {
      if (m.kind == MacroKind::expandable) continue;
      commands_.insert_or_assign(m.name, m);
      if (handler.redefinable.count(m.name) > 0) math_commands_.insert(m.name);
    }
    for (const EnvironmentHint& e : handler.environments) environments_.insert_or_assign(e.name, e);
  }

  const EnvironmentHint* environment(std::string_view name) const {
    const auto it = environments_.find(name);
    return it == environments_.end() ? nullptr : &it->second;
  }

  bool is_list_role(EnvironmentRole role) const {
    return role == EnvironmentRole::itemize || role == EnvironmentRole::enumerate ||
           role == EnvironmentRole::description || role == EnvironmentRole::bibliography;
  }

  static void skip_spaces(Cursor& cur) {
    while (!cur.done() && cur.peek().is_space()) ++cur.pos;
  }

  static void skip_blank(Cursor& cur) {
    while (!cur.done() && (cur.peek().is_space() || cur.peek().is_par())) ++cur.pos;
  }

  static bool skip_star(Cursor& cur) {
    if (!cur.done() && cur.peek().is_char(CatCode::other, "*")) {
      ++cur.pos;
      return true;
    }
    return false;
  }

  /// "[...]" at brace depth zero, after optional spaces.
  static std::optional<TokenSpan> optional_arg(Cursor& cur) {
    std::size_t i = cur.pos;
    while (i < cur.toks.size() && cur.toks[i].is_space()) ++i;
    if (i >= cur.toks.size() || !cur.toks[i].is_char(CatCode::other, "[")) return std::nullopt;
    int depth = 0;
    for (std::size_t j = i + 1; j < cur.toks.size(); ++j) {
      const Token& t = cur.toks[j];
      if (t.is_begin_group()) {
        ++depth;
      } else if (t.is_end_group()) {
        if (--depth < 0) return std::nullopt;
      } else if (t.is_par()) {
        return std::nullopt;
      } else if (depth == 0 && t.is_char(CatCode::other, "]")) {
        cur.pos = j + 1;
        return cur.toks.subspan(i + 1, j - i - 1);
      }
    }
    return std::nullopt;
  }

  /// Undelimited argument: a braced group (contents only) or a single token.
  std::optional<TokenSpan> group_arg(Cursor& cur) {
    skip_spaces(cur);
    if (cur.done() || cur.peek().is_end_group() || cur.peek().is_par()) return std::nullopt;
    if (!cur.peek().is_begin_group()) return cur.toks.subspan(cur.pos++, 1);
    const std::size_t open = cur.pos;
    const std::size_t close = matching_brace(cur.toks, open);
    if (close == std::string::npos) {
      diag(Severity::error, "unterminated-group", "unterminated group in argument", cur.peek().location);
      cur.pos = cur.toks.size();
      return cur.toks.subspan(open + 1);
    }
    cur.pos = close + 1;
    return cur.toks.subspan(open + 1, close - open - 1);
  }

  std::optional<TokenSpan> required_arg(Cursor& cur, const Token& cs) {
    auto arg = group_arg(cur);
    if (!arg) {
      diag(Severity::error, "missing-argument", "\\" + cs.text + " is missing its argument", cs.location);
    }
    return arg;
  }

  void skip_command_args(Cursor& cur, const MacroDef& def) {
    skip_star(cur);
    if (def.optional_argument) optional_arg(cur);
    for (int i = 0; i < def.arity; ++i) {
      if (!group_arg(cur)) break;
    }
  }

  // Raw text of a control sequence plus directly attached [..] / {..} arguments.
  std::string raw_command(Cursor& cur, std::size_t cs_index) {
    while (!cur.done()) {
      const std::size_t before = cur.pos;
      if (cur.peek().is_char(CatCode::other, "[")) {
        if (!optional_arg(cur)) break;
      } else if (cur.peek().is_begin_group()) {
        const std::size_t close = matching_brace(cur.toks, cur.pos);
        if (close == std::string::npos) break;
        cur.pos = close + 1;
      } else {
        break;
      }
      if (cur.pos == before) break;
    }
    return span_text(cur.toks.subspan(cs_index, cur.pos - cs_index));
  }

  Block& emit_block(const Frame& frame, Block block) {
    Blocks& sink = frame.out != nullptr        ? *frame.out
                   : open_sections_.empty()     ? doc_.body
                                                : open_sections_.back().children;
    sink.push_back(std::move(block));
    return sink.back();
  }

  void finish_paragraph(Inlines& para, const Frame& frame) {
    normalize(para);
    trim_edges(para);
    if (!para.empty() && !is_blank(para)) emit_block(frame, Block{Paragraph{std::move(para)}});
    para.clear();
  }

  void close_sections(int level) {
    while (!open_sections_.empty() && open_sections_.back().level >= level) {
      Section done = std::move(open_sections_.back());
      open_sections_.pop_back();
      Blocks& parent = open_sections_.empty() ? doc_.body : open_sections_.back().children;
      parent.push_back(Block{std::move(done)});
    }
  }

  void attach_label(const std::string& key, SourceLocation loc) {
    if (key.empty()) {
      diag(Severity::warning, "empty-label", "\\label with an empty key", loc);
      return;
    }
    if (!seen_labels_.insert(key).second) {
      diag(Severity::warning, "duplicate-label", "label '" + key + "' defined more than once; first kept",
           loc);
      return;
    }
    if (!label_sinks_.empty() && label_sinks_.back() != nullptr) {
      label_sinks_.back()->push_back(key);
    } else if (!open_sections_.empty()) {
      open_sections_.back().labels.push_back(key);
    } else {
      diag(Severity::info, "label-without-target", "label '" + key + "' has nothing to refer to", loc);
    }
  }

  // Tokens up to the matching \end{name}; stops early (without consuming) at
  // an \end of an enclosing environment.
  struct Collected {
    TokenSpan body;
    bool terminated = false;
  };

  Collected collect_environment(Cursor& cur, const std::string& name, SourceLocation begin_loc) {
    const std::size_t start = cur.pos;
    int depth = 0;
    for (std::size_t i = cur.pos; i < cur.toks.size(); ++i) {
      const Token& t = cur.toks[i];
      if (!t.is_cs("begin") && !t.is_cs("end")) continue;
      const auto env = environment_name_at(cur.toks, i);
      if (!env) continue;
      if (env->first == name) {
        if (t.is_cs("begin")) {
          ++depth;
        } else if (depth-- == 0) {
          cur.pos = env->second;
          return {cur.toks.subspan(start, i - start), true};
        }
      } else if (t.is_cs("end") &&
                 std::find(open_envs_.begin(), open_envs_.end(), env->first) != open_envs_.end()) {
        diag(Severity::error, "unterminated-environment",
             "environment '" + name + "' closed by \\end{" + env->first + "}", t.location);
        cur.pos = i;
        return {cur.toks.subspan(start, i - start), false};
      }
    }
    diag(Severity::error, "unterminated-environment", "environment '" + name + "' is never closed",
         begin_loc);
    cur.pos = cur.toks.size();
    return {cur.toks.subspan(start), false};
  }

  void report_close(const std::string& name, const Stop& stop, SourceLocation begin_loc) {
    if (stop.kind == StopKind::end_of_input) {
      diag(Severity::error, "unterminated-environment", "environment '" + name + "' is never closed",
           begin_loc);
    } else if (stop.kind == StopKind::end_environment && !stop.matched) {
      diag(Severity::error, "environment-mismatch",
           "environment '" + name + "' implicitly closed by an outer \\end", stop.location);
    }
  }

  // Groups and environments nested past this depth are kept as source text.
  static constexpr int max_nesting = 200;

  struct NestingGuard {
    int& depth;
    explicit NestingGuard(int& d) : depth(++d) {}
    ~NestingGuard() { --depth; }
  };

  bool too_deep(const Cursor& cur) {
    if (nesting_ <= max_nesting) return false;
    if (!nesting_reported_) {
      nesting_reported_ = true;
      diag(Severity::error, "nesting-too-deep", "nesting deeper than " + std::to_string(max_nesting) + " levels kept as source",
           cur.done() ? SourceLocation{} : cur.peek().location);
    }
    return true;
  }

  Blocks parse_isolated(TokenSpan toks) {
    Blocks blocks;
    std::vector<std::string> saved_envs;
    std::swap(saved_envs, open_envs_);
    Cursor cur{toks};
    parse_blocks(cur, Frame{&blocks, false});
    std::swap(saved_envs, open_envs_);
    return blocks;
  }

  // ------------------------------------------------------------ preamble

  void preamble(TokenSpan toks) {
    Cursor cur{toks};
    while (!cur.done()) {
      const Token& t = cur.next();
      if (!t.is_cs()) continue;
      if (t.text == "documentclass") {
        optional_arg(cur);
        if (auto arg = group_arg(cur)) doc_.metadata.document_class = span_text(*arg);
      } else if (t.text == "usepackage" || t.text == "RequirePackage") {
        use_package(cur);
      } else if (t.text == "title" || t.text == "author" || t.text == "date") {
        metadata_command(cur, t);
      }
    }
  }

  void use_package(Cursor& cur) {
    optional_arg(cur);
    auto arg = group_arg(cur);
    if (!arg) return;
    for (const std::string& name : split_list(detokenize(*arg))) {
      doc_.packages.push_back(name);
      const PackageHandler* handler = registry_.resolve(name);
      if (handler == nullptr) {
        if (doc_.unknown_packages.insert(name).second) {
          diag(Severity::warning, "unknown-package",
               "package '" + name + "' is not supported; some content may not render", arg->front().location);
        }
      } else if (handler->kind == PackageKind::implemented) {
        load_handler(*handler);
      }
    }
  }

  void metadata_command(Cursor& cur, const Token& cs) {
    if (cs.text == "date") {
      group_arg(cur);
      return;
    }
    optional_arg(cur);
    auto arg = required_arg(cur, cs);
    if (!arg) return;
    if (cs.text == "title") {
      Inlines title = parse_inlines(*arg);
      normalize(title);
      trim_edges(title);
      doc_.metadata.title = std::move(title);
      return;
    }
    // \author{A \and B}
    std::size_t start = 0;
    int depth = 0;
    auto add_author = [&](std::size_t end) {
      Inlines author = parse_inlines(arg->subspan(start, end - start));
      normalize(author);
      trim_edges(author);
      if (!author.empty()) doc_.metadata.authors.push_back(std::move(author));
    };
    for (std::size_t i = 0; i < arg->size(); ++i) {
      const Token& t = (*arg)[i];
      if (t.is_begin_group()) ++depth;
      if (t.is_end_group()) --depth;
      if (depth == 0 && t.is_cs("and")) {
        add_author(i);
        start = i + 1;
      }
    }
    add_author(arg->size());
  }

  // -------------------------------------------------------------- blocks

  bool is_block_trigger(const Cursor& cur) const {
    const Token& t = cur.peek();
    if (t.is_cs()) {
      if (section_level(t.text) || t.text == "item" || t.text == "bibitem" || t.text == "[" ||
          t.text == "end") {
        return true;
      }
      if (t.text == "begin") {
        const auto env = environment_name_at(cur.toks, cur.pos);
        if (!env) return false;
        const EnvironmentHint* hint = environment(env->first);
        return hint == nullptr || hint->role != EnvironmentRole::math_inline;
      }
      return false;
    }
    if (t.is_char(CatCode::math_shift)) {
      const Token* n = cur.peek_at(1);
      return n != nullptr && n->is_char(CatCode::math_shift);
    }
    return false;
  }

  // True when the group at cur.pos holds paragraph breaks or block constructs,
  // in which case its braces are treated as transparent.
  bool group_is_transparent(const Cursor& cur) {
    const std::size_t close = matching_brace(cur.toks, cur.pos);
    if (close == std::string::npos) {
      diag(Severity::error, "unterminated-group", "group opened here is never closed", cur.peek().location);
      return true;
    }
    Cursor probe{cur.toks.subspan(0, close), cur.pos + 1};
    for (; !probe.done(); ++probe.pos) {
      if (probe.peek().is_par() || probe.peek().is_cs("par") || is_block_trigger(probe)) return true;
    }
    return false;
  }

  Stop parse_blocks(Cursor& cur, Frame frame) {
    const NestingGuard guard(nesting_);
    if (too_deep(cur)) {
      Inlines raw;
      append_text(raw, detokenize(cur.rest()));
      cur.pos = cur.toks.size();
      finish_paragraph(raw, frame);
      return Stop{};
    }
    Inlines para;
    while (!cur.done()) {
      const Token& t = cur.peek();
      if (t.is_par() || t.is_cs("par")) {
        ++cur.pos;
        finish_paragraph(para, frame);
        continue;
      }
      if (t.is_cs()) {
        if (section_level(t.text)) {
          finish_paragraph(para, frame);
          section(cur, frame);
          continue;
        }
        if (t.text == "end") {
          finish_paragraph(para, frame);
          if (auto stop = end_environment(cur)) return *stop;
          continue;
        }
        if (t.text == "begin") {
          const auto env = environment_name_at(cur.toks, cur.pos);
          const EnvironmentHint* hint = env ? environment(env->first) : nullptr;
          if (!env) {
            diag(Severity::error, "malformed-begin", "\\begin without an environment name", t.location);
            ++cur.pos;
            continue;
          }
          if (hint == nullptr || hint->role != EnvironmentRole::math_inline) {
            finish_paragraph(para, frame);
            begin_environment(cur, frame, env->first, env->second);
            continue;
          }
        }
        if (t.text == "item" || t.text == "bibitem") {
          if (frame.list_item) {
            finish_paragraph(para, frame);
            return Stop{StopKind::item, true, t.location};
          }
          diag(Severity::warning, "item-outside-list", "\\" + t.text + " outside a list", t.location);
          ++cur.pos;
          optional_arg(cur);
          if (t.text == "bibitem") group_arg(cur);
          continue;
        }
        if (t.text == "[") {
          finish_paragraph(para, frame);
          ++cur.pos;
          display_math_delimited(cur, frame, t, "]");
          continue;
        }
      }
      if (t.is_char(CatCode::math_shift) && cur.peek_at(1) != nullptr &&
          cur.peek_at(1)->is_char(CatCode::math_shift)) {
        finish_paragraph(para, frame);
        cur.pos += 2;
        display_math_dollars(cur, frame, t);
        continue;
      }
      if (t.is_end_group()) {
        ++cur.pos;
        if (transparent_groups_ > 0) {
          --transparent_groups_;
        } else {
          diag(Severity::error, "unbalanced-brace", "unmatched '}'", t.location);
        }
        continue;
      }
      if (t.is_begin_group() && group_is_transparent(cur)) {
        ++cur.pos;
        ++transparent_groups_;
        continue;
      }
      parse_inline(cur, para);
    }
    finish_paragraph(para, frame);
    return Stop{StopKind::end_of_input, false, {}};
  }

  // Returns a Stop when the enclosing parse_blocks should return.
  std::optional<Stop> end_environment(Cursor& cur) {
    const Token& t = cur.peek();
    const auto env = environment_name_at(cur.toks, cur.pos);
    if (!env) {
      diag(Severity::error, "malformed-end", "\\end without an environment name", t.location);
      ++cur.pos;
      return std::nullopt;
    }
    const std::string& name = env->first;
    if (!open_envs_.empty() && open_envs_.back() == name) {
      cur.pos = env->second;
      return Stop{StopKind::end_environment, true, t.location};
    }
    if (std::find(open_envs_.begin(), open_envs_.end(), name) != open_envs_.end()) {
      return Stop{StopKind::end_environment, false, t.location};
    }
    if (!open_envs_.empty() && open_envs_.back() != "document") {
      diag(Severity::error, "environment-mismatch",
           "\\end{" + name + "} does not match \\begin{" + open_envs_.back() + "}", t.location);
      cur.pos = env->second;
      return Stop{StopKind::end_environment, true, t.location};
    }
    diag(Severity::error, "stray-end", "\\end{" + name + "} without a matching \\begin", t.location);
    cur.pos = env->second;
    return std::nullopt;
  }

  void section(Cursor& cur, const Frame& frame) {
    const Token& cs = cur.next();
    int level = *section_level(cs.text);
    if (cs.text == "part" || cs.text == "chapter") {
      diag(Severity::warning, "unsupported-sectioning", "\\" + cs.text + " treated as \\section", cs.location);
    } else if (cs.text == "subparagraph") {
      diag(Severity::info, "unsupported-sectioning", "\\subparagraph treated as \\paragraph", cs.location);
    }
    const bool starred = skip_star(cur);
    optional_arg(cur);
    Section section;
    if (auto title = required_arg(cur, cs)) section.title = parse_inlines(*title);
    normalize(section.title);
    trim_edges(section.title);
    section.numbered = !starred && level <= 3;

    if (frame.out != nullptr) {
      section.level = level;
      emit_block(frame, Block{std::move(section)});
      return;
    }
    close_sections(level);
    const int parent = open_sections_.empty() ? 0 : open_sections_.back().level;
    if (level > parent + 1) {
      diag(Severity::warning, "section-level-skipped",
           "\\" + cs.text + " directly below level " + std::to_string(parent) + "; promoted to level " +
               std::to_string(parent + 1),
           cs.location);
      level = parent + 1;
      section.numbered = !starred && level <= 3;
    }
    section.level = level;
    open_sections_.push_back(std::move(section));
  }

  void begin_environment(Cursor& cur, const Frame& frame, const std::string& name, std::size_t body_start) {
    const SourceLocation loc = cur.peek().location;
    const std::size_t begin_index = cur.pos;
    cur.pos = body_start;
    const EnvironmentHint* hint = environment(name);
    if (hint == nullptr) {
      unknown_environment(cur, frame, name, begin_index, loc);
      return;
    }
    const EnvironmentHint h = *hint;
    auto skip_args = [&] {
      if (h.optional) optional_arg(cur);
      for (int i = 0; i < h.arity; ++i) group_arg(cur);
    };
    switch (h.role) {
      case EnvironmentRole::document:
        // Nested \begin{document}: keep going as if it were a group.
        return;
      case EnvironmentRole::itemize:
      case EnvironmentRole::enumerate:
      case EnvironmentRole::description:
      case EnvironmentRole::bibliography:
        optional_arg(cur);
        for (int i = 0; i < h.arity; ++i) group_arg(cur);
        list(cur, frame, name, h.role, loc);
        return;
      case EnvironmentRole::figure:
      case EnvironmentRole::table:
        optional_arg(cur);
        float_environment(cur, frame, name, h.role == EnvironmentRole::figure, loc);
        return;
      case EnvironmentRole::tabular: {
        optional_arg(cur);
        std::optional<TokenSpan> spec;
        for (int i = 0; i < std::max(1, h.arity); ++i) spec = group_arg(cur);
        const Collected body = collect_environment(cur, name, loc);
        emit_block(frame, Block{tabular(body.body, spec ? *spec : TokenSpan{})});
        return;
      }
      case EnvironmentRole::verbatim: {
        const Collected body = collect_environment(cur, name, loc);
        std::string text;
        for (const Token& t : body.body) text += t.is_char() ? t.text : detokenize(std::span(&t, 1));
        if (!text.empty() && text.front() == '\n') text.erase(0, 1);
        if (!text.empty() && text.back() == '\n') text.pop_back();
        emit_block(frame, Block{Verbatim{std::move(text)}});
        return;
      }
      case EnvironmentRole::quote: {
        skip_args();
        Quote quote;
        const Stop stop = environment_body(cur, name, Frame{&quote.children, false});
        report_close(name, stop, loc);
        emit_block(frame, Block{std::move(quote)});
        return;
      }
      case EnvironmentRole::abstract: {
        Blocks content;
        const Stop stop = environment_body(cur, name, Frame{&content, false});
        report_close(name, stop, loc);
        if (!doc_.metadata.abstract) {
          doc_.metadata.abstract = std::move(content);
        } else {
          emit_block(frame, Block{Quote{std::move(content)}});
        }
        return;
      }
      case EnvironmentRole::transparent: {
        skip_args();
        // Content is spliced into the surrounding flow.
        Blocks content;
        const Stop stop = environment_body(cur, name, Frame{&content, false});
        report_close(name, stop, loc);
        for (Block& b : content) emit_block(frame, std::move(b));
        return;
      }
      case EnvironmentRole::math_numbered:
      case EnvironmentRole::math_unnumbered: {
        skip_args();
        const Collected body = collect_environment(cur, name, loc);
        emit_block(frame, Block{display_math(body.body, name, h.role == EnvironmentRole::math_numbered)});
        return;
      }
      case EnvironmentRole::math_inline: {
        const Collected body = collect_environment(cur, name, loc);
        Inlines para{Inline{MathInline{math_source(body.body, nullptr, nullptr)}}};
        emit_block(frame, Block{Paragraph{std::move(para)}});
        return;
      }
    }
  }

  Stop environment_body(Cursor& cur, const std::string& name, Frame inner) {
    open_envs_.push_back(name);
    const Stop stop = parse_blocks(cur, inner);
    open_envs_.pop_back();
    return stop;
  }

  void unknown_environment(Cursor& cur, const Frame& frame, const std::string& name, std::size_t begin_index,
                           SourceLocation loc) {
    diag(Severity::warning, "unknown-environment", "environment '" + name + "' is not supported; shown as source",
         loc);
    const Collected body = collect_environment(cur, name, loc);
    (void)body;
    emit_block(frame, Block{UnknownEnvironment{name, span_text(cur.toks.subspan(begin_index, cur.pos - begin_index))}});
  }

  void list(Cursor& cur, const Frame& frame, const std::string& name, EnvironmentRole role, SourceLocation loc) {
    List list;
    switch (role) {
      case EnvironmentRole::enumerate: list.kind = ListKind::ordered; break;
      case EnvironmentRole::description: list.kind = ListKind::description; break;
      case EnvironmentRole::bibliography: list.kind = ListKind::bibliography; break;
      default: list.kind = ListKind::unordered; break;
    }
    const bool numbered = list.kind == ListKind::ordered || list.kind == ListKind::bibliography;
    open_envs_.push_back(name);
    bool first = true;
    while (true) {
      skip_blank(cur);
      ListItem item;
      bool explicit_item = false;
      if (!cur.done() && (cur.peek().is_cs("item") || cur.peek().is_cs("bibitem"))) {
        const Token& marker = cur.next();
        explicit_item = true;
        if (auto label = optional_arg(cur)) {
          Inlines text = parse_inlines(*label);
          normalize(text);
          trim_edges(text);
          item.label = std::move(text);
        }
        if (marker.text == "bibitem") {
          if (auto key = group_arg(cur)) {
            item.key = span_text(*key);
            if (!item.key.empty() && !bib_keys_.insert(item.key).second) {
              diag(Severity::warning, "duplicate-label", "bibliography key '" + item.key + "' repeated",
                   marker.location);
            }
          }
        }
      }
      label_sinks_.push_back(numbered ? &item.labels : nullptr);
      const Stop stop = parse_blocks(cur, Frame{&item.content, true});
      label_sinks_.pop_back();
      if (explicit_item || !item.content.empty()) {
        if (!explicit_item && first) {
          diag(Severity::warning, "text-before-item", "list content before the first \\item", loc);
        }
        list.items.push_back(std::move(item));
      }
      first = false;
      if (stop.kind == StopKind::item) continue;
      report_close(name, stop, loc);
      break;
    }
    open_envs_.pop_back();
    emit_block(frame, Block{std::move(list)});
  }

  void float_environment(Cursor& cur, const Frame& frame, const std::string& name, bool is_figure,
                         SourceLocation loc) {
    Blocks content;
    std::optional<Inlines> caption;
    std::vector<std::string> labels;
    label_sinks_.push_back(&labels);
    caption_sinks_.push_back(&caption);
    const Stop stop = environment_body(cur, name, Frame{&content, false});
    caption_sinks_.pop_back();
    label_sinks_.pop_back();
    report_close(name, stop, loc);

    const std::string caption_text = caption ? plain_text(*caption) : std::string{};
    fill_alt_text(content, caption_text, loc);
    if (is_figure) {
      emit_block(frame, Block{Figure{std::move(content), std::move(caption), std::move(labels), {}}});
    } else {
      emit_block(frame, Block{Table{std::move(content), std::move(caption), std::move(labels), {}}});
    }
  }

  void fill_alt_text(Blocks& content, const std::string& caption_text, SourceLocation loc) {
    for (Block& b : content) {
      auto* p = std::get_if<Paragraph>(&b.node);
      if (p == nullptr) continue;
      for (Inline& i : p->content) {
        auto* image = std::get_if<Image>(&i.node);
        if (image == nullptr || image->alt) continue;
        if (!caption_text.empty()) {
          image->alt = caption_text;
        } else {
          image->alt = "";
          diag(Severity::warning, "missing-alt-text", "figure graphic '" + image->path + "' has no alt text or caption",
               loc);
        }
      }
    }
  }

  Tabular tabular(TokenSpan body, TokenSpan spec) {
    Tabular table;
    table.alignments = column_spec(spec);
    const std::size_t columns = table.alignments.size();

    std::vector<TokenSpan> rows;
    std::size_t start = 0;
    int depth = 0;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i].is_begin_group()) ++depth;
      if (body[i].is_end_group()) --depth;
      if (depth == 0 && (body[i].is_cs("\\") || body[i].is_cs("tabularnewline"))) {
        rows.push_back(body.subspan(start, i - start));
        start = i + 1;
        // \\[2pt]
        Cursor skip{body, start};
        if (optional_arg(skip)) start = skip.pos;
        i = start - 1;
      }
    }
    rows.push_back(body.subspan(start));

    bool warned_span = false;
    for (TokenSpan row : rows) {
      std::vector<Inlines> cells;
      std::vector<TokenSpan> cell_spans;
      std::size_t cell_start = 0;
      depth = 0;
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i].is_begin_group()) ++depth;
        if (row[i].is_end_group()) --depth;
        if (depth == 0 && row[i].is_char(CatCode::alignment)) {
          cell_spans.push_back(row.subspan(cell_start, i - cell_start));
          cell_start = i + 1;
        }
      }
      cell_spans.push_back(row.subspan(cell_start));

      bool row_has_content = cell_spans.size() > 1;
      for (TokenSpan cell : cell_spans) {
        Cursor c{cell};
        std::vector<Token> kept;
        std::size_t span_columns = 1;
        std::optional<TokenSpan> span_content;
        while (!c.done()) {
          const Token& t = c.next();
          if (t.is_cs() && is_rule(t.text)) {
            if (t.text == "cline" || t.text == "cmidrule") {
              // \cmidrule(lr){1-2}
              if (!c.done() && c.peek().is_char(CatCode::other, "(")) {
                while (!c.done() && !c.next().is_char(CatCode::other, ")")) {
                }
              }
              optional_arg(c);
              group_arg(c);
            } else {
              optional_arg(c);
            }
            continue;
          }
          if (t.is_cs("multicolumn") || t.is_cs("multirow")) {
            auto count = group_arg(c);
            group_arg(c);
            span_content = group_arg(c);
            if (t.is_cs("multicolumn") && count) {
              const std::string n = span_text(*count);
              span_columns = std::max<std::size_t>(1, static_cast<std::size_t>(std::atoi(n.c_str())));
            }
            if (!warned_span) {
              diag(Severity::warning, "span-collapsed", "\\" + t.text + " collapsed to a single cell",
                   t.location);
              warned_span = true;
            }
            continue;
          }
          kept.push_back(t);
        }
        Inlines content = parse_inlines(kept);
        if (span_content) {
          Inlines inner = parse_inlines(*span_content);
          content.insert(content.end(), inner.begin(), inner.end());
        }
        normalize(content);
        trim_edges(content);
        if (!content.empty()) row_has_content = true;
        cells.push_back(std::move(content));
        for (std::size_t extra = 1; extra < span_columns; ++extra) cells.emplace_back();
      }
      if (!row_has_content) continue;
      if (columns > 0 && cells.size() > columns) {
        diag(Severity::warning, "extra-cells",
             "row has " + std::to_string(cells.size()) + " cells for " + std::to_string(columns) + " columns",
             row.empty() ? SourceLocation{} : row.front().location);
      }
      table.rows.push_back(std::move(cells));
    }
    std::size_t width = columns;
    for (const auto& r : table.rows) width = std::max(width, r.size());
    for (auto& r : table.rows) r.resize(width);
    table.alignments.resize(width, 'l');
    return table;
  }

  std::vector<char> column_spec(TokenSpan spec) {
    std::vector<char> out;
    std::string text;
    for (const Token& t : spec) {
      if (t.is_char()) text += t.text;
      else if (t.is_cs()) text += '\\';
    }
    std::function<void(std::string_view)> walk = [&](std::string_view s) {
      for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        auto skip_group = [&](std::size_t at) -> std::size_t {
          if (at >= s.size() || s[at] != '{') return at;
          int depth = 0;
          for (std::size_t j = at; j < s.size(); ++j) {
            if (s[j] == '{') ++depth;
            if (s[j] == '}' && --depth == 0) return j + 1;
          }
          return s.size();
        };
        if (c == 'l' || c == 'c' || c == 'r') {
          out.push_back(c);
        } else if (c == 'p' || c == 'm' || c == 'b') {
          out.push_back('l');
          i = skip_group(i + 1) - 1;
        } else if (c == 'X' || c == 'S') {
          out.push_back('l');
        } else if (c == '@' || c == '!' || c == '>' || c == '<') {
          i = skip_group(i + 1) - 1;
        } else if (c == '*') {
          const std::size_t count_end = skip_group(i + 1);
          const std::size_t body_end = skip_group(count_end);
          if (count_end > i + 2 && body_end > count_end + 1) {
            const int n = std::atoi(std::string(s.substr(i + 2, count_end - i - 3)).c_str());
            const std::string_view inner = s.substr(count_end + 1, body_end - count_end - 2);
            for (int k = 0; k < std::min(n, 64); ++k) walk(inner);
          }
          i = body_end - 1;
        }
      }
    };
    walk(text);
    return out;
  }

  // ---------------------------------------------------------------- math

  /// Source text of a math span with \label / \nonumber / \notag removed.
  std::string math_source(TokenSpan toks, std::vector<std::string>* labels, bool* suppress_number) {
    std::vector<Token> kept;
    Cursor c{toks};
    while (!c.done()) {
      const Token& t = c.next();
      if (t.is_cs("label")) {
        if (auto key = group_arg(c); key && labels != nullptr) {
          const std::string k = span_text(*key);
          if (!seen_labels_.insert(k).second) {
            diag(Severity::warning, "duplicate-label", "label '" + k + "' defined more than once; first kept",
                 t.location);
          } else {
            labels->push_back(k);
          }
        }
        continue;
      }
      if (t.is_cs("nonumber") || t.is_cs("notag")) {
        if (suppress_number != nullptr) *suppress_number = true;
        continue;
      }
      kept.push_back(t);
    }
    return span_text(kept);
  }

  MathDisplay display_math(TokenSpan toks, std::string env, bool numbered) {
    MathDisplay math;
    bool suppressed = false;
    math.tex = math_source(toks, &math.labels, &suppressed);
    math.environment = std::move(env);
    // A multi-line alignment keeps its number unless every line opts out; we
    // track one number per display.
    const bool multiline = math.tex.find("\\\\") != std::string::npos;
    math.numbered = numbered && !(suppressed && !multiline);
    return math;
  }

  void display_math_delimited(Cursor& cur, const Frame& frame, const Token& open, std::string_view closer) {
    const std::size_t start = cur.pos;
    while (!cur.done() && !cur.peek().is_cs(closer) && !cur.peek().is_par()) ++cur.pos;
    const TokenSpan body = cur.toks.subspan(start, cur.pos - start);
    if (cur.done() || !cur.peek().is_cs(closer)) {
      diag(Severity::error, "unterminated-math", "display math opened with \\" + open.text + " is not closed",
           open.location);
    } else {
      ++cur.pos;
    }
    emit_block(frame, Block{display_math(body, "\\" + open.text, false)});
  }

  void display_math_dollars(Cursor& cur, const Frame& frame, const Token& open) {
    const std::size_t start = cur.pos;
    while (!cur.done() && !cur.peek().is_char(CatCode::math_shift) && !cur.peek().is_par()) ++cur.pos;
    const TokenSpan body = cur.toks.subspan(start, cur.pos - start);
    if (cur.done() || !cur.peek().is_char(CatCode::math_shift)) {
      diag(Severity::error, "unterminated-math", "display math opened with $$ is not closed", open.location);
    } else {
      ++cur.pos;
      if (!cur.done() && cur.peek().is_char(CatCode::math_shift)) {
        ++cur.pos;
      } else {
        diag(Severity::error, "unterminated-math", "display math opened with $$ closed by a single $",
             open.location);
      }
    }
    emit_block(frame, Block{display_math(body, "$$", false)});
  }

  void inline_math(Cursor& cur, Inlines& out, const Token& open) {
    const bool dollar = open.is_char(CatCode::math_shift);
    if (dollar && !cur.done() && cur.peek().is_char(CatCode::math_shift)) {
      // $$ inside an inline context.
      ++cur.pos;
    }
    const std::size_t start = cur.pos;
    auto is_close = [&](const Token& t) { return dollar ? t.is_char(CatCode::math_shift) : t.is_cs(")"); };
    while (!cur.done() && !is_close(cur.peek()) && !cur.peek().is_par()) ++cur.pos;
    const TokenSpan body = cur.toks.subspan(start, cur.pos - start);
    if (cur.done() || !is_close(cur.peek())) {
      diag(Severity::error, "unterminated-math", "inline math is not closed", open.location);
    } else {
      ++cur.pos;
      if (dollar && !cur.done() && cur.peek().is_char(CatCode::math_shift) && cur.pos >= 2 &&
          cur.toks[start - 1].is_char(CatCode::math_shift) && start >= 2 &&
          cur.toks[start - 2].is_char(CatCode::math_shift)) {
        ++cur.pos;
      }
    }
    out.push_back(Inline{MathInline{math_source(body, nullptr, nullptr)}});
  }

  // ------------------------------------------------------------- inlines

  Inlines parse_inlines(TokenSpan toks) {
    const NestingGuard guard(nesting_);
    Cursor cur{toks};
    Inlines out;
    if (too_deep(cur)) {
      append_text(out, detokenize(toks));
      return out;
    }
    while (!cur.done()) {
      const Token& t = cur.peek();
      if (t.is_cs()) {
        const auto sw = style_switches().find(t.text);
        if (sw != style_switches().end()) {
          ++cur.pos;
          Inlines rest = parse_inlines(cur.rest());
          normalize(rest);
          if (!rest.empty()) out.push_back(Inline{Styled{sw->second, std::move(rest)}});
          break;
        }
      }
      if (t.is_par() || t.is_cs("par")) {
        ++cur.pos;
        append_text(out, " ");
        continue;
      }
      if (is_block_trigger(cur)) {
        Inlines flat = flatten(parse_isolated(cur.rest()));
        if (!out.empty() && !flat.empty()) append_text(out, " ");
        out.insert(out.end(), std::make_move_iterator(flat.begin()), std::make_move_iterator(flat.end()));
        break;
      }
      if (t.is_end_group()) {
        ++cur.pos;
        diag(Severity::error, "unbalanced-brace", "unmatched '}'", t.location);
        continue;
      }
      parse_inline(cur, out);
    }
    return out;
  }

  void parse_inline(Cursor& cur, Inlines& out) {
    const Token& t = cur.next();
    switch (t.kind) {
      case TokenKind::paragraph_break: append_text(out, " "); return;
      case TokenKind::parameter: append_text(out, "#" + std::to_string(t.param_index)); return;
      case TokenKind::control_sequence: command(cur, t, out); return;
      case TokenKind::character: break;
    }
    switch (t.category) {
      case CatCode::space: append_text(out, " "); return;
      case CatCode::begin_group: {
        const std::size_t open = cur.pos - 1;
        const std::size_t close = matching_brace(cur.toks, open);
        TokenSpan inner;
        if (close == std::string::npos) {
          diag(Severity::error, "unterminated-group", "group is never closed", t.location);
          inner = cur.toks.subspan(open + 1);
          cur.pos = cur.toks.size();
        } else {
          inner = cur.toks.subspan(open + 1, close - open - 1);
          cur.pos = close + 1;
        }
        Inlines group = parse_inlines(inner);
        out.insert(out.end(), std::make_move_iterator(group.begin()), std::make_move_iterator(group.end()));
        return;
      }
      case CatCode::end_group:
        diag(Severity::error, "unbalanced-brace", "unmatched '}'", t.location);
        return;
      case CatCode::math_shift: inline_math(cur, out, t); return;
      case CatCode::alignment:
        diag(Severity::warning, "misplaced-alignment", "'&' outside a table", t.location);
        append_text(out, "&");
        return;
      case CatCode::superscript:
      case CatCode::subscript:
        diag(Severity::warning, "math-outside-math", "'" + t.text + "' outside math mode", t.location);
        append_text(out, t.text);
        return;
      case CatCode::other:
        append_text(out, t.text == "~" ? " " : t.text);
        return;
      default: append_text(out, t.text); return;
    }
  }

  void command(Cursor& cur, const Token& cs, Inlines& out) {
    const std::string& name = cs.text;
    const std::size_t cs_index = cur.pos - 1;

    if (!commands_.count(name) && !text_symbols().count(name) && !style_commands().count(name) &&
        !style_switches().count(name) && !accents().count(name)) {
      const std::string raw = raw_command(cur, cs_index);
      diag(Severity::warning, "unrendered-command", "unknown command " + raw + " shown as source", cs.location);
      out.push_back(Inline{UnknownCommand{raw}});
      return;
    }
    if (const auto sym = text_symbols().find(name); sym != text_symbols().end()) {
      append_text(out, sym->second);
      return;
    }
    if (const auto style = style_commands().find(name); style != style_commands().end()) {
      Inlines children;
      if (auto arg = required_arg(cur, cs)) children = parse_inlines(*arg);
      normalize(children);
      out.push_back(Inline{Styled{style->second, std::move(children)}});
      return;
    }
    if (style_switches().count(name)) return;  // outside a group: no scope to apply to
    if (const auto accent = accents().find(name); accent != accents().end()) {
      std::string base;
      if (auto arg = group_arg(cur)) base = plain_text(parse_inlines(*arg));
      if (base.empty()) base = " ";
      const auto first = utf8::decode(base, 0);
      std::string combined = base.substr(0, first.length);
      utf8::append(combined, accent->second);
      combined += base.substr(first.length);
      append_text(out, combined);
      return;
    }
    if (name == "\\" || name == "newline" || name == "linebreak") {
      skip_star(cur);
      optional_arg(cur);
      out.push_back(Inline{LineBreak{}});
      return;
    }
    if (const auto kind = ref_kind(name)) {
      skip_star(cur);
      Ref ref;
      ref.kind = *kind;
      if (auto arg = required_arg(cur, cs)) ref.key = span_text(*arg);
      out.push_back(Inline{std::move(ref)});
      return;
    }
    if (is_cite(name)) {
      skip_star(cur);
      Cite cite;
      auto first = optional_arg(cur);
      auto second = optional_arg(cur);
      if (second) {
        cite.note = span_text(*second);
      } else if (first) {
        cite.note = span_text(*first);
      }
      if (auto arg = required_arg(cur, cs)) cite.keys = split_list(span_text(*arg));
      out.push_back(Inline{std::move(cite)});
      return;
    }
    if (name == "url") {
      if (auto arg = required_arg(cur, cs)) link(out, span_text(*arg), std::nullopt, cs);
      return;
    }
    if (name == "href") {
      auto url = required_arg(cur, cs);
      auto label = url ? required_arg(cur, cs) : std::nullopt;
      if (url) link(out, span_text(*url), label, cs);
      return;
    }
    if (name == "includegraphics") {
      skip_star(cur);
      auto options = optional_arg(cur);
      Image image;
      if (auto arg = required_arg(cur, cs)) image.path = span_text(*arg);
      if (options) image.alt = alt_option(*options);
      out.push_back(Inline{std::move(image)});
      return;
    }
    if (name == "footnote") {
      optional_arg(cur);
      Footnote note;
      if (auto arg = required_arg(cur, cs)) note.content = parse_isolated(*arg);
      out.push_back(Inline{std::move(note)});
      return;
    }
    if (name == "thanks") {
      if (auto arg = required_arg(cur, cs)) out.push_back(Inline{Footnote{parse_isolated(*arg)}});
      return;
    }
    if (name == "verb") {
      verb(cur, cs, out);
      return;
    }
    if (name == "label") {
      if (auto arg = required_arg(cur, cs)) attach_label(span_text(*arg), cs.location);
      return;
    }
    if (name == "caption") {
      optional_arg(cur);
      auto arg = required_arg(cur, cs);
      if (!arg) return;
      Inlines caption = parse_inlines(*arg);
      normalize(caption);
      trim_edges(caption);
      if (!caption_sinks_.empty()) {
        *caption_sinks_.back() = std::move(caption);
      } else {
        diag(Severity::warning, "caption-outside-float", "\\caption outside a figure or table", cs.location);
        out.insert(out.end(), caption.begin(), caption.end());
      }
      return;
    }
    if (name == "(") {
      inline_math(cur, out, cs);
      return;
    }
    if (name == "begin") {
      // Only inline-math environments reach here.
      const auto env = environment_name_at(cur.toks, cs_index);
      if (env) {
        cur.pos = env->second;
        const Collected body = collect_environment(cur, env->first, cs.location);
        out.push_back(Inline{MathInline{math_source(body.body, nullptr, nullptr)}});
      }
      return;
    }
    if (name == "input" || name == "include") {
      out.push_back(Inline{UnknownCommand{raw_command(cur, cs_index)}});
      return;
    }
    if (name == "setcounter") {
      group_arg(cur);
      group_arg(cur);
      diag(Severity::info, "setcounter-ignored", "\\setcounter is ignored; numbering follows document order",
           cs.location);
      return;
    }
    if (name == "title" || name == "author" || name == "date") {
      metadata_command(cur, cs);
      return;
    }
    if (name == "usepackage" || name == "RequirePackage") {
      use_package(cur);
      return;
    }
    if (name == "documentclass") {
      optional_arg(cur);
      group_arg(cur);
      return;
    }
    if (name == "maketitle" || name == "and" || name == "par") return;
    if (name == "multicolumn" || name == "multirow") {
      group_arg(cur);
      group_arg(cur);
      if (auto arg = group_arg(cur)) {
        Inlines content = parse_inlines(*arg);
        out.insert(out.end(), content.begin(), content.end());
      }
      return;
    }

    const MacroDef& def = commands_.at(name);
    if (def.kind == MacroKind::ignored || is_rule(name)) {
      skip_command_args(cur, def);
      return;
    }
    // Structural commands with no text-mode meaning (math vocabulary, a stray
    // \item in an inline argument, \]) are shown as source.
    const std::string raw = raw_command(cur, cs_index);
    if (math_commands_.count(name)) {
      diag(Severity::warning, "math-outside-math", raw + " used outside math mode", cs.location);
    } else {
      diag(Severity::warning, "unrendered-command", raw + " has no rendering here", cs.location);
    }
    out.push_back(Inline{UnknownCommand{raw}});
  }

  void link(Inlines& out, std::string url, std::optional<TokenSpan> label, const Token& cs) {
    Link link;
    link.url = std::move(url);
    if (label) {
      link.text = parse_inlines(*label);
      normalize(link.text);
      trim_edges(link.text);
    }
    if (link.text.empty()) link.text.push_back(Inline{Code{link.url}});
    (void)cs;
    out.push_back(Inline{std::move(link)});
  }

  static std::optional<std::string> alt_option(TokenSpan options) {
    const std::string text = detokenize(options);
    std::size_t pos = 0;
    int depth = 0;
    std::size_t start = 0;
    std::vector<std::string> parts;
    for (; pos <= text.size(); ++pos) {
      if (pos == text.size() || (text[pos] == ',' && depth == 0)) {
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
        continue;
      }
      if (text[pos] == '{') ++depth;
      if (text[pos] == '}') --depth;
    }
    for (const std::string& part : parts) {
      const auto eq = part.find('=');
      if (eq == std::string::npos || trim(part.substr(0, eq)) != "alt") continue;
      std::string value = trim(part.substr(eq + 1));
      if (value.size() >= 2 && value.front() == '{' && value.back() == '}') value = value.substr(1, value.size() - 2);
      return trim(value);
    }
    return std::nullopt;
  }

  void verb(Cursor& cur, const Token& cs, Inlines& out) {
    skip_star(cur);
    if (cur.done() || !cur.peek().is_char()) {
      diag(Severity::warning, "verb-unterminated", "\\verb without content", cs.location);
      return;
    }
    const std::string delim = cur.next().text;
    std::string raw;
    while (!cur.done() && cur.peek().is_char(CatCode::other) && cur.peek().text != delim) raw += cur.next().text;
    if (!cur.done() && cur.peek().is_char(CatCode::other) && cur.peek().text == delim) ++cur.pos;
    out.push_back(Inline{Code{std::move(raw)}});
  }

  TokenSpan tokens_;
  const PackageRegistry& registry_;
  Document doc_;
  std::map<std::string, MacroDef, std::less<>> commands_;
  std::set<std::string, std::less<>> math_commands_;
  std::map<std::string, EnvironmentHint, std::less<>> environments_;
  std::deque<Section> open_sections_;
  std::vector<std::string> open_envs_;
  std::vector<std::vector<std::string>*> label_sinks_;
  std::vector<std::optional<Inlines>*> caption_sinks_;
  std::set<std::string> seen_labels_;
  std::set<std::string> bib_keys_;
  int transparent_groups_ = 0;
  int nesting_ = 0;
  bool nesting_reported_ = false;
};

}  // namespace

Document parse(std::span<const Token> tokens, const PackageRegistry& registry) {
  return Parser(tokens, registry).run();
}

}  // namespace texhtml
