#include <map>

#include "texhtml/document.hpp"

namespace texhtml {

std::string_view to_string(InlineStyle style) {
  switch (style) {
    case InlineStyle::emphasis: return "emphasis";
    case InlineStyle::bold: return "bold";
    case InlineStyle::italic: return "italic";
    case InlineStyle::monospace: return "monospace";
    case InlineStyle::small_caps: return "small-caps";
    case InlineStyle::sans_serif: return "sans-serif";
    case InlineStyle::roman: return "roman";
    case InlineStyle::slanted: return "slanted";
    case InlineStyle::underline: return "underline";
    case InlineStyle::superscript: return "superscript";
    case InlineStyle::subscript: return "subscript";
  }
  return "emphasis";
}

std::string_view to_string(ListKind kind) {
  switch (kind) {
    case ListKind::unordered: return "unordered";
    case ListKind::ordered: return "ordered";
    case ListKind::description: return "description";
    case ListKind::bibliography: return "bibliography";
  }
  return "unordered";
}

Inline text(std::string value) { return Inline{Text{std::move(value)}}; }
Block paragraph(Inlines content) { return Block{Paragraph{std::move(content)}}; }

// ---------------------------------------------------------------- visitors

namespace {

template <typename BlocksT, typename InlinesFn, typename BlockFn>
void walk_blocks(BlocksT& blocks, InlinesFn& on_inlines, BlockFn& on_block);

template <typename InlinesT, typename InlinesFn, typename BlockFn>
void walk_inlines(InlinesT& inlines, InlinesFn& on_inlines, BlockFn& on_block) {
  on_inlines(inlines);
  for (auto& item : inlines) {
    std::visit(
        [&](auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, Styled> || std::is_same_v<T, Link>) {
            if constexpr (std::is_same_v<T, Styled>) {
              walk_inlines(node.children, on_inlines, on_block);
            } else {
              walk_inlines(node.text, on_inlines, on_block);
            }
          } else if constexpr (std::is_same_v<T, Footnote>) {
            walk_blocks(node.content, on_inlines, on_block);
          }
        },
        item.node);
  }
}

template <typename BlocksT, typename InlinesFn, typename BlockFn>
void walk_blocks(BlocksT& blocks, InlinesFn& on_inlines, BlockFn& on_block) {
  for (auto& block : blocks) {
    on_block(block);
    std::visit(
        [&](auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, Section>) {
            walk_inlines(node.title, on_inlines, on_block);
            walk_blocks(node.children, on_inlines, on_block);
          } else if constexpr (std::is_same_v<T, Paragraph>) {
            walk_inlines(node.content, on_inlines, on_block);
          } else if constexpr (std::is_same_v<T, List>) {
            for (auto& item : node.items) {
              if (item.label) walk_inlines(*item.label, on_inlines, on_block);
              walk_blocks(item.content, on_inlines, on_block);
            }
          } else if constexpr (std::is_same_v<T, Figure> || std::is_same_v<T, Table>) {
            walk_blocks(node.content, on_inlines, on_block);
            if (node.caption) walk_inlines(*node.caption, on_inlines, on_block);
          } else if constexpr (std::is_same_v<T, Tabular>) {
            for (auto& row : node.rows) {
              for (auto& cell : row) walk_inlines(cell, on_inlines, on_block);
            }
          } else if constexpr (std::is_same_v<T, Quote>) {
            walk_blocks(node.children, on_inlines, on_block);
          }
        },
        block.node);
  }
}

template <typename DocT, typename InlinesFn, typename BlockFn>
void walk_document(DocT& doc, InlinesFn on_inlines, BlockFn on_block) {
  if (doc.metadata.title) walk_inlines(*doc.metadata.title, on_inlines, on_block);
  for (auto& author : doc.metadata.authors) walk_inlines(author, on_inlines, on_block);
  if (doc.metadata.abstract) walk_blocks(*doc.metadata.abstract, on_inlines, on_block);
  walk_blocks(doc.body, on_inlines, on_block);
}

}  // namespace

void for_each_inlines(Document& doc, const std::function<void(Inlines&)>& visit) {
  walk_document(doc, visit, [](Block&) {});
}

void for_each_inlines(const Document& doc, const std::function<void(const Inlines&)>& visit) {
  walk_document(doc, visit, [](const Block&) {});
}

void for_each_block(const Document& doc, const std::function<void(const Block&)>& visit) {
  walk_document(doc, [](const Inlines&) {}, visit);
}

// -------------------------------------------------------------- plain text

namespace {

void plain_into(const Inlines& inlines, std::string& out);

void plain_into(const Blocks& blocks, std::string& out) {
  auto sep = [&] {
    if (!out.empty() && out.back() != ' ') out += ' ';
  };
  for (const Block& block : blocks) {
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          sep();
          if constexpr (std::is_same_v<T, Section>) {
            plain_into(node.title, out);
            plain_into(node.children, out);
          } else if constexpr (std::is_same_v<T, Paragraph>) {
            plain_into(node.content, out);
          } else if constexpr (std::is_same_v<T, List>) {
            for (const auto& item : node.items) {
              sep();
              if (item.label) plain_into(*item.label, out);
              plain_into(item.content, out);
            }
          } else if constexpr (std::is_same_v<T, Figure> || std::is_same_v<T, Table>) {
            plain_into(node.content, out);
            if (node.caption) {
              sep();
              plain_into(*node.caption, out);
            }
          } else if constexpr (std::is_same_v<T, Tabular>) {
            for (const auto& row : node.rows) {
              for (const auto& cell : row) {
                sep();
                plain_into(cell, out);
              }
            }
          } else if constexpr (std::is_same_v<T, MathDisplay>) {
            out += node.tex;
          } else if constexpr (std::is_same_v<T, Quote>) {
            plain_into(node.children, out);
          } else if constexpr (std::is_same_v<T, Verbatim>) {
            out += node.text;
          } else if constexpr (std::is_same_v<T, UnknownEnvironment>) {
            out += node.raw;
          }
        },
        block.node);
  }
}

void plain_into(const Inlines& inlines, std::string& out) {
  for (const Inline& item : inlines) {
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, Text>) {
            out += node.text;
          } else if constexpr (std::is_same_v<T, Styled>) {
            plain_into(node.children, out);
          } else if constexpr (std::is_same_v<T, MathInline>) {
            out += node.tex;
          } else if constexpr (std::is_same_v<T, Ref>) {
            out += node.resolved.value_or(node.key);
          } else if constexpr (std::is_same_v<T, Cite>) {
            out += '[';
            for (std::size_t i = 0; i < node.keys.size(); ++i) {
              if (i > 0) out += ", ";
              out += i < node.resolved.size() && !node.resolved[i].empty() ? node.resolved[i] : node.keys[i];
            }
            out += ']';
          } else if constexpr (std::is_same_v<T, Link>) {
            plain_into(node.text, out);
          } else if constexpr (std::is_same_v<T, Image>) {
            out += node.alt.value_or("");
          } else if constexpr (std::is_same_v<T, UnknownCommand>) {
            out += node.raw;
          } else if constexpr (std::is_same_v<T, Footnote>) {
            // Footnotes are not part of running text.
          } else if constexpr (std::is_same_v<T, Code>) {
            out += node.raw;
          } else if constexpr (std::is_same_v<T, LineBreak>) {
            out += ' ';
          }
        },
        item.node);
  }
}

}  // namespace

std::string plain_text(const Inlines& inlines) {
  std::string out;
  plain_into(inlines, out);
  return out;
}

std::string plain_text(const Blocks& blocks) {
  std::string out;
  plain_into(blocks, out);
  return out;
}

// ------------------------------------------------------------- numbering

namespace {

class Resolver {
 public:
  explicit Resolver(Document& doc) : doc_(doc) {}

  void run() {
    if (doc_.metadata.abstract) number_blocks(*doc_.metadata.abstract);
    number_blocks(doc_.body);
    for_each_inlines(doc_, [this](Inlines& inlines) { resolve(inlines); });
  }

 private:
  void bind(const std::vector<std::string>& labels, const std::string& number) {
    for (const std::string& key : labels) labels_.emplace(key, number);
  }

  void number_blocks(Blocks& blocks) {
    for (Block& block : blocks) {
      std::visit([this](auto& node) { number(node); }, block.node);
    }
  }

  void number(Section& s) {
    if (s.numbered) {
      const std::size_t depth = static_cast<std::size_t>(std::clamp(s.level, 1, 3));
      counters_.resize(depth, 0);
      ++counters_[depth - 1];
      counters_.resize(depth);
      s.number.clear();
      for (std::size_t i = 0; i < counters_.size(); ++i) {
        if (i > 0) s.number += '.';
        s.number += std::to_string(counters_[i]);
      }
      current_section_ = s.number;
    }
    bind(s.labels, s.numbered ? s.number : current_section_);
    number_blocks(s.children);
  }

  void number(List& list) {
    int counter = 0;
    for (ListItem& item : list.items) {
      if (list.kind == ListKind::ordered || list.kind == ListKind::bibliography) {
        item.number = std::to_string(++counter);
        bind(item.labels, item.number);
        if (list.kind == ListKind::bibliography && !item.key.empty()) {
          bibliography_.emplace(item.key, item.label ? plain_text(*item.label) : item.number);
        }
      }
      number_blocks(item.content);
    }
  }

  void number(Figure& f) {
    f.number = std::to_string(++figures_);
    bind(f.labels, f.number);
    number_blocks(f.content);
  }

  void number(Table& t) {
    t.number = std::to_string(++tables_);
    bind(t.labels, t.number);
    number_blocks(t.content);
  }

  void number(MathDisplay& m) {
    if (m.numbered) {
      m.number = std::to_string(++equations_);
      bind(m.labels, m.number);
    } else {
      bind(m.labels, "");
    }
  }

  void number(Quote& q) { number_blocks(q.children); }

  template <typename T>
  void number(T&) {}

  void resolve(Inlines& inlines) {
    for (Inline& item : inlines) {
      if (auto* ref = std::get_if<Ref>(&item.node)) {
        const auto it = labels_.find(ref->key);
        if (it == labels_.end() || it->second.empty()) {
          ref->resolved = "??";
          report(doc_.diagnostics, Severity::warning, Stage::parser, "unresolved-reference",
                 "reference to undefined label '" + ref->key + "'");
        } else {
          ref->resolved = ref->kind == RefKind::equation ? "(" + it->second + ")" : it->second;
        }
      } else if (auto* cite = std::get_if<Cite>(&item.node)) {
        cite->resolved.clear();
        if (bibliography_.empty()) continue;
        for (const std::string& key : cite->keys) {
          const auto it = bibliography_.find(key);
          if (it == bibliography_.end()) {
            report(doc_.diagnostics, Severity::warning, Stage::parser, "unresolved-citation",
                   "citation key '" + key + "' not in the bibliography");
            cite->resolved.emplace_back();
          } else {
            cite->resolved.push_back(it->second);
          }
        }
      }
    }
  }

  Document& doc_;
  std::vector<int> counters_;
  std::string current_section_;
  int figures_ = 0;
  int tables_ = 0;
  int equations_ = 0;
  std::map<std::string, std::string> labels_;
  std::map<std::string, std::string> bibliography_;
};

}  // namespace

Document resolve_refs(Document doc) {
  Resolver(doc).run();
  return doc;
}

// -------------------------------------------------------------------- json

namespace {

using json = nlohmann::ordered_json;

json labels_json(const std::vector<std::string>& labels) { return json(labels); }

}  // namespace

json to_json(const Inlines& inlines) {
  json out = json::array();
  for (const Inline& item : inlines) {
    json node;
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Text>) {
            node = {{"type", "text"}, {"text", n.text}};
          } else if constexpr (std::is_same_v<T, Styled>) {
            node = {{"type", "styled"}, {"style", to_string(n.style)}, {"children", to_json(n.children)}};
          } else if constexpr (std::is_same_v<T, MathInline>) {
            node = {{"type", "math"}, {"tex", n.tex}};
          } else if constexpr (std::is_same_v<T, Ref>) {
            node = {{"type", "ref"}, {"key", n.key}};
            node["kind"] = n.kind == RefKind::equation ? "equation" : n.kind == RefKind::page ? "page" : "plain";
            if (n.resolved) node["resolved"] = *n.resolved;
          } else if constexpr (std::is_same_v<T, Cite>) {
            node = {{"type", "cite"}, {"keys", n.keys}};
            if (!n.note.empty()) node["note"] = n.note;
            if (!n.resolved.empty()) node["resolved"] = n.resolved;
          } else if constexpr (std::is_same_v<T, Link>) {
            node = {{"type", "link"}, {"url", n.url}, {"text", to_json(n.text)}};
          } else if constexpr (std::is_same_v<T, Image>) {
            node = {{"type", "image"}, {"path", n.path}};
            if (n.alt) node["alt"] = *n.alt;
          } else if constexpr (std::is_same_v<T, UnknownCommand>) {
            node = {{"type", "unknown-command"}, {"raw", n.raw}};
          } else if constexpr (std::is_same_v<T, Footnote>) {
            node = {{"type", "footnote"}, {"content", to_json(n.content)}};
          } else if constexpr (std::is_same_v<T, Code>) {
            node = {{"type", "code"}, {"raw", n.raw}};
          } else if constexpr (std::is_same_v<T, LineBreak>) {
            node = {{"type", "line-break"}};
          }
        },
        item.node);
    out.push_back(std::move(node));
  }
  return out;
}

json to_json(const Blocks& blocks) {
  json out = json::array();
  for (const Block& block : blocks) {
    json node;
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Section>) {
            node = {{"type", "section"}, {"level", n.level}, {"numbered", n.numbered}, {"number", n.number},
                    {"title", to_json(n.title)}, {"labels", labels_json(n.labels)},
                    {"children", to_json(n.children)}};
          } else if constexpr (std::is_same_v<T, Paragraph>) {
            node = {{"type", "paragraph"}, {"content", to_json(n.content)}};
          } else if constexpr (std::is_same_v<T, List>) {
            json items = json::array();
            for (const ListItem& item : n.items) {
              json j = {{"content", to_json(item.content)}};
              if (item.label) j["label"] = to_json(*item.label);
              if (!item.key.empty()) j["key"] = item.key;
              if (!item.number.empty()) j["number"] = item.number;
              if (!item.labels.empty()) j["labels"] = labels_json(item.labels);
              items.push_back(std::move(j));
            }
            node = {{"type", "list"}, {"kind", to_string(n.kind)}, {"items", std::move(items)}};
          } else if constexpr (std::is_same_v<T, Figure> || std::is_same_v<T, Table>) {
            node = {{"type", std::is_same_v<T, Figure> ? "figure" : "table"}, {"number", n.number},
                    {"labels", labels_json(n.labels)}, {"content", to_json(n.content)}};
            if (n.caption) node["caption"] = to_json(*n.caption);
          } else if constexpr (std::is_same_v<T, Tabular>) {
            json rows = json::array();
            for (const auto& row : n.rows) {
              json cells = json::array();
              for (const auto& cell : row) cells.push_back(to_json(cell));
              rows.push_back(std::move(cells));
            }
            node = {{"type", "tabular"}, {"alignments", std::string(n.alignments.begin(), n.alignments.end())},
                    {"rows", std::move(rows)}};
          } else if constexpr (std::is_same_v<T, MathDisplay>) {
            node = {{"type", "display-math"}, {"environment", n.environment}, {"tex", n.tex},
                    {"numbered", n.numbered}, {"number", n.number}, {"labels", labels_json(n.labels)}};
          } else if constexpr (std::is_same_v<T, Quote>) {
            node = {{"type", "quote"}, {"children", to_json(n.children)}};
          } else if constexpr (std::is_same_v<T, Verbatim>) {
            node = {{"type", "verbatim"}, {"text", n.text}};
          } else if constexpr (std::is_same_v<T, UnknownEnvironment>) {
            node = {{"type", "unknown-environment"}, {"name", n.name}, {"raw", n.raw}};
          }
        },
        block.node);
    out.push_back(std::move(node));
  }
  return out;
}

json to_json(const Document& doc) {
  json meta = json::object();
  if (doc.metadata.document_class) meta["documentClass"] = *doc.metadata.document_class;
  if (doc.metadata.title) meta["title"] = to_json(*doc.metadata.title);
  json authors = json::array();
  for (const auto& a : doc.metadata.authors) authors.push_back(to_json(a));
  meta["authors"] = std::move(authors);
  if (doc.metadata.abstract) meta["abstract"] = to_json(*doc.metadata.abstract);

  json diags = json::array();
  for (const Diagnostic& d : doc.diagnostics) {
    diags.push_back({{"severity", to_string(d.severity)}, {"stage", to_string(d.stage)}, {"code", d.code},
                     {"message", d.message}, {"line", d.location.line}, {"column", d.location.column}});
  }
  return json{{"metadata", std::move(meta)},
              {"packages", doc.packages},
              {"unknownPackages", doc.unknown_packages},
              {"body", to_json(doc.body)},
              {"diagnostics", std::move(diags)}};
}

}  // namespace texhtml
