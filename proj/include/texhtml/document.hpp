#pragma once

// Semantic document tree built from the expanded token stream.
//
// The tree keeps what a typeset page throws away: section hierarchy,
// captions, labels and references, list structure, and math source.

#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "texhtml/diagnostics.hpp"
#include "texhtml/lexer.hpp"
#include "texhtml/package_registry.hpp"

namespace texhtml {

// ---------------------------------------------------------------- inlines

enum class InlineStyle {
  emphasis,
  bold,
  italic,
  monospace,
  small_caps,
  sans_serif,
  roman,
  slanted,
  underline,
  superscript,
  subscript,
};

std::string_view to_string(InlineStyle style);

struct Inline;
struct Block;
using Inlines = std::vector<Inline>;
using Blocks = std::vector<Block>;

struct Text {
  std::string text;
};

struct Styled {
  InlineStyle style = InlineStyle::emphasis;
  Inlines children;
};

struct MathInline {
  std::string tex;
};

enum class RefKind { plain, equation, page };

struct Ref {
  std::string key;
  RefKind kind = RefKind::plain;
  std::optional<std::string> resolved;  // set by resolve_refs; "??" when the label is missing
};

struct Cite {
  std::vector<std::string> keys;
  std::string note;  // optional post-note, e.g. "p.~3"
  std::vector<std::string> resolved;  // bibliography numbers; empty when not found
};

struct Link {
  std::string url;
  Inlines text;
};

struct Image {
  std::string path;
  std::optional<std::string> alt;
};

struct UnknownCommand {
  std::string raw;
};

struct Footnote {
  Blocks content;
};

struct Code {
  std::string raw;
};

struct LineBreak {};

struct Inline {
  std::variant<Text, Styled, MathInline, Ref, Cite, Link, Image, UnknownCommand, Footnote, Code, LineBreak>
      node;
};

// ----------------------------------------------------------------- blocks

struct Section {
  int level = 1;  // 1 = \section ... 4 = \paragraph
  bool numbered = true;
  Inlines title;
  std::vector<std::string> labels;
  std::string number;
  Blocks children;
};

struct Paragraph {
  Inlines content;
};

enum class ListKind { unordered, ordered, description, bibliography };

std::string_view to_string(ListKind kind);

struct ListItem {
  std::optional<Inlines> label;
  std::string key;  // \bibitem key
  std::vector<std::string> labels;
  std::string number;
  Blocks content;
};

struct List {
  ListKind kind = ListKind::unordered;
  std::vector<ListItem> items;
};

struct Figure {
  Blocks content;
  std::optional<Inlines> caption;
  std::vector<std::string> labels;
  std::string number;
};

struct Table {
  Blocks content;
  std::optional<Inlines> caption;
  std::vector<std::string> labels;
  std::string number;
};

struct Tabular {
  std::vector<char> alignments;  // 'l', 'c', 'r' per column
  std::vector<std::vector<Inlines>> rows;
};

struct MathDisplay {
  std::string tex;
  std::string environment;  // "equation", "align*", "\\[" ...
  bool numbered = false;
  std::vector<std::string> labels;
  std::string number;
};

struct Quote {
  Blocks children;
};

struct Verbatim {
  std::string text;
};

struct UnknownEnvironment {
  std::string name;
  std::string raw;  // full source including \begin and \end
};

struct Block {
  std::variant<Section, Paragraph, List, Figure, Table, Tabular, MathDisplay, Quote, Verbatim,
               UnknownEnvironment>
      node;
};

// --------------------------------------------------------------- document

struct Metadata {
  std::optional<std::string> document_class;
  std::optional<Inlines> title;
  std::vector<Inlines> authors;
  std::optional<Blocks> abstract;
};

struct Document {
  Metadata metadata;
  Blocks body;
  Diagnostics diagnostics;
  std::vector<std::string> packages;  // in request order
  std::set<std::string> unknown_packages;
};

/// Never fails: malformed input yields a best-effort tree plus diagnostics.
Document parse(std::span<const Token> tokens, const PackageRegistry& registry);

/// Numbers sections, floats, equations and ordered-list items in document
/// order and annotates every Ref (and Cite with a local bibliography).
Document resolve_refs(Document doc);

// ------------------------------------------------------------- utilities

std::string plain_text(const Inlines& inlines);
std::string plain_text(const Blocks& blocks);

/// Stable, JSON-shaped dump for debugging and golden tests.
nlohmann::ordered_json to_json(const Document& doc);
nlohmann::ordered_json to_json(const Blocks& blocks);
nlohmann::ordered_json to_json(const Inlines& inlines);

/// Visits every inline sequence in the tree, in document order.
void for_each_inlines(Document& doc, const std::function<void(Inlines&)>& visit);
void for_each_inlines(const Document& doc, const std::function<void(const Inlines&)>& visit);

/// Visits every block in document order (pre-order, including nested ones).
void for_each_block(const Document& doc, const std::function<void(const Block&)>& visit);

// Convenience constructors, mostly for tests and golden fixtures.
Inline text(std::string value);
Block paragraph(Inlines content);

}  // namespace texhtml
