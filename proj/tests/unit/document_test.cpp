#include <gtest/gtest.h>

#include "test_util.hpp"
#include "texhtml/document.hpp"

using namespace texhtml;
using testutil::has_code;

namespace {

Document doc_of(std::string_view body, std::string_view preamble = "") {
  ConversionResult r = testutil::run_body(body, preamble);
  EXPECT_TRUE(r.document.has_value());
  return r.document ? std::move(*r.document) : Document{};
}

template <class T>
const T* block_as(const Blocks& blocks, std::size_t i) {
  if (i >= blocks.size()) return nullptr;
  return std::get_if<T>(&blocks[i].node);
}

std::vector<int> section_levels(const Blocks& blocks) {
  std::vector<int> out;
  for (const Block& b : blocks) {
    if (const auto* s = std::get_if<Section>(&b.node)) {
      out.push_back(s->level);
      for (int l : section_levels(s->children)) out.push_back(l);
    }
  }
  return out;
}

}  // namespace

TEST(Parser, SectionsNest) {
  const Document d = doc_of("\\section{A}x\\subsection{B}y\\subsubsection{C}z\\section{D}w");
  ASSERT_EQ(d.body.size(), 2u);
  const Section* a = block_as<Section>(d.body, 0);
  ASSERT_NE(a, nullptr);
  EXPECT_EQ(plain_text(a->title), "A");
  EXPECT_EQ(a->number, "1");
  EXPECT_EQ(section_levels(d.body), (std::vector<int>{1, 2, 3, 1}));
  const Section* b = block_as<Section>(a->children, 1);
  ASSERT_NE(b, nullptr);
  EXPECT_EQ(b->number, "1.1");
  EXPECT_EQ(block_as<Section>(d.body, 1)->number, "2");
}

TEST(Parser, StarredSectionsAreUnnumbered) {
  const Document d = doc_of("\\section*{Intro}\\section{One}");
  EXPECT_FALSE(block_as<Section>(d.body, 0)->numbered);
  EXPECT_EQ(block_as<Section>(d.body, 1)->number, "1");
}

TEST(Parser, LevelSkipIsPromotedWithWarning) {
  ConversionResult r = testutil::run_body("\\section{A}\\subsubsection{B}");
  EXPECT_TRUE(has_code(r.diagnostics, "section-level-skipped"));
  EXPECT_EQ(section_levels(r.document->body), (std::vector<int>{1, 2}));
}

TEST(Parser, MetadataAndAbstract) {
  const Document d = doc_of("\\maketitle\\begin{abstract}Short.\\end{abstract}Body.",
                            "\\title{On \\emph{Things}}\\author{Ann \\and Bob}\\date{today}");
  ASSERT_TRUE(d.metadata.title.has_value());
  EXPECT_EQ(plain_text(*d.metadata.title), "On Things");
  ASSERT_EQ(d.metadata.authors.size(), 2u);
  EXPECT_EQ(plain_text(d.metadata.authors[1]), "Bob");
  ASSERT_TRUE(d.metadata.abstract.has_value());
  EXPECT_EQ(plain_text(*d.metadata.abstract), "Short.");
  EXPECT_EQ(d.metadata.document_class, "article");
}

TEST(Parser, ListsAndItems) {
  const Document d = doc_of("\\begin{enumerate}\\item one\\item two \\begin{itemize}\\item inner\\end{itemize}\\end{enumerate}");
  const List* list = block_as<List>(d.body, 0);
  ASSERT_NE(list, nullptr);
  EXPECT_EQ(list->kind, ListKind::ordered);
  ASSERT_EQ(list->items.size(), 2u);
  EXPECT_EQ(list->items[1].number, "2");
  ASSERT_NE(block_as<List>(list->items[1].content, 1), nullptr);
}

TEST(Parser, DescriptionLabels) {
  const Document d = doc_of("\\begin{description}\\item[Term] meaning\\end{description}");
  const List* list = block_as<List>(d.body, 0);
  ASSERT_NE(list, nullptr);
  ASSERT_TRUE(list->items[0].label.has_value());
  EXPECT_EQ(plain_text(*list->items[0].label), "Term");
}

TEST(Parser, TextBeforeItemWarns) {
  EXPECT_TRUE(has_code(testutil::run_body("\\begin{itemize}stray\\item a\\end{itemize}").diagnostics,
                       "text-before-item"));
}

TEST(Parser, FigureCaptionLabelAndAltFromCaption) {
  const Document d = doc_of(
      "\\begin{figure}\\includegraphics{a.png}\\caption{A plot}\\label{fig:a}\\end{figure}See \\ref{fig:a}.",
      "\\usepackage{graphicx}");
  const Figure* f = block_as<Figure>(d.body, 0);
  ASSERT_NE(f, nullptr);
  EXPECT_EQ(plain_text(*f->caption), "A plot");
  EXPECT_EQ(f->labels, (std::vector<std::string>{"fig:a"}));
  EXPECT_EQ(f->number, "1");
  std::optional<std::string> alt;
  for_each_inlines(d, [&](const Inlines& inlines) {
    for (const Inline& i : inlines) {
      if (const auto* img = std::get_if<Image>(&i.node)) alt = img->alt;
    }
  });
  EXPECT_EQ(alt, "A plot");
  EXPECT_NE(plain_text(d.body).find("See 1."), std::string::npos);
}

TEST(Parser, FigureWithoutCaptionGetsEmptyAltAndWarning) {
  ConversionResult r = testutil::run_body("\\begin{figure}\\includegraphics{a.png}\\end{figure}", "\\usepackage{graphicx}");
  EXPECT_TRUE(has_code(r.diagnostics, "missing-alt-text"));
}

TEST(Parser, ExplicitAltOptionWins) {
  ConversionResult r = testutil::run_body("\\includegraphics[alt={Bar chart},width=3cm]{b.png}", "\\usepackage{graphicx}");
  ASSERT_TRUE(r.html.has_value());
  EXPECT_NE(r.html->html.find("alt=\"Bar chart\""), std::string::npos);
  EXPECT_FALSE(has_code(r.diagnostics, "missing-alt-text"));
}

TEST(Parser, TabularRowsAndAlignment) {
  const Document d = doc_of("\\begin{tabular}{|l|r|}\\hline a & b \\\\ c & d \\\\ \\hline\\end{tabular}");
  const Tabular* t = block_as<Tabular>(d.body, 0);
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->alignments, (std::vector<char>{'l', 'r'}));
  ASSERT_EQ(t->rows.size(), 2u);
  EXPECT_EQ(plain_text(t->rows[1][1]), "d");
}

TEST(Parser, VerbatimKeepsSource) {
  const Document d = doc_of("\\begin{verbatim}\n  a % b \\c{d}\n\\end{verbatim}");
  const Verbatim* v = block_as<Verbatim>(d.body, 0);
  ASSERT_NE(v, nullptr);
  EXPECT_EQ(v->text, "  a % b \\c{d}");
}

TEST(Parser, MathInlineAndDisplay) {
  const Document d = doc_of("Let $x^2$ be.\\begin{equation}\\label{e}a=b\\end{equation}\\[c\\]By \\eqref{e}.",
                            "\\usepackage{amsmath}");
  const MathDisplay* eq = block_as<MathDisplay>(d.body, 1);
  ASSERT_NE(eq, nullptr);
  EXPECT_TRUE(eq->numbered);
  EXPECT_EQ(eq->number, "1");
  const MathDisplay* un = block_as<MathDisplay>(d.body, 2);
  ASSERT_NE(un, nullptr);
  EXPECT_FALSE(un->numbered);
  EXPECT_NE(plain_text(d.body).find("By (1)."), std::string::npos);
}

TEST(Parser, UnterminatedMathIsAnError) {
  ConversionResult r = testutil::run_body("Math $x + y\n\nnext");
  EXPECT_TRUE(has_code(r.diagnostics, "unterminated-math"));
  EXPECT_EQ(r.status, ConversionStatus::errors_but_readable);
}

TEST(Parser, UnknownCommandKeptAsRawText) {
  ConversionResult r = testutil::run_body("Hello \\zzfoo[o]{bar} world");
  bool found = false;
  for_each_inlines(*r.document, [&](const Inlines& inlines) {
    for (const Inline& i : inlines) {
      if (const auto* u = std::get_if<UnknownCommand>(&i.node)) found = found || u->raw == "\\zzfoo[o]{bar}";
    }
  });
  EXPECT_TRUE(found);
  EXPECT_TRUE(has_code(r.diagnostics, "unrendered-command"));
}

TEST(Parser, UnknownEnvironmentKeptRaw) {
  const Document d = doc_of("\\begin{tikzpicture}\\draw (0,0);\\end{tikzpicture}");
  const UnknownEnvironment* u = block_as<UnknownEnvironment>(d.body, 0);
  ASSERT_NE(u, nullptr);
  EXPECT_EQ(u->name, "tikzpicture");
  EXPECT_NE(u->raw.find("\\draw"), std::string::npos);
}

TEST(Parser, StructuralErrorsRecover) {
  for (const char* body : {"a } b", "\\end{quote} x", "\\begin{itemize}\\item a\\end{enumerate}", "\\emph{never closed",
                           "\\begin{quote} open"}) {
    ConversionResult r = testutil::run_body(body);
    EXPECT_TRUE(has_severity(r.diagnostics, Severity::error)) << body;
    EXPECT_TRUE(r.html.has_value()) << body;
  }
}

TEST(Parser, CitationsResolveAgainstBibliography) {
  const Document d = doc_of("See \\cite{k1,k2}.\\begin{thebibliography}{9}\\bibitem{k1} One.\\bibitem{k2} Two.\\end{thebibliography}");
  EXPECT_NE(plain_text(d.body).find("[1, 2]"), std::string::npos);
}

TEST(Parser, UnresolvedReferencesWarn) {
  ConversionResult r = testutil::run_body(
      "\\ref{nope} \\cite{nobody}\\begin{thebibliography}{9}\\bibitem{k} K.\\end{thebibliography}");
  EXPECT_TRUE(has_code(r.diagnostics, "unresolved-reference"));
  EXPECT_TRUE(has_code(r.diagnostics, "unresolved-citation"));
}

TEST(Parser, CitationsWithoutBibliographyStaySilent) {
  EXPECT_FALSE(has_code(testutil::run_body("\\cite{external}").diagnostics, "unresolved-citation"));
}

TEST(Parser, DuplicateLabelWarns) {
  EXPECT_TRUE(has_code(testutil::run_body("\\section{A}\\label{x}\\section{B}\\label{x}").diagnostics, "duplicate-label"));
}

TEST(Parser, FootnotesCollected) {
  const Document d = doc_of("Text.\\footnote{Note \\emph{here}.}");
  bool found = false;
  for_each_inlines(d, [&](const Inlines& inlines) {
    for (const Inline& i : inlines) found = found || std::holds_alternative<Footnote>(i.node);
  });
  EXPECT_TRUE(found);
}

TEST(Parser, TypographicLigatures) {
  const Document d = doc_of("``q'' a--b c---d");
  EXPECT_EQ(plain_text(d.body), "\xE2\x80\x9Cq\xE2\x80\x9D a\xE2\x80\x93" "b c\xE2\x80\x94" "d");
}

TEST(Parser, MathVocabularyInTextWarns) {
  EXPECT_TRUE(has_code(testutil::run_body("an \\alpha here").diagnostics, "math-outside-math"));
}

TEST(Parser, DeepNestingIsBounded) {
  const std::string deep = std::string(5000, '{') + "x" + std::string(5000, '}');
  ConversionResult r = testutil::run_body(deep);
  EXPECT_TRUE(has_code(r.diagnostics, "nesting-too-deep"));
  EXPECT_TRUE(r.html.has_value());
}

TEST(Parser, UnknownPackagesRecorded) {
  const Document d = doc_of("x", "\\usepackage{amsmath,tikz}\\usepackage[opt]{pgfplots}");
  EXPECT_EQ(d.unknown_packages, (std::set<std::string>{"pgfplots", "tikz"}));
  EXPECT_EQ(d.packages, (std::vector<std::string>{"amsmath", "tikz", "pgfplots"}));
}

TEST(DocumentJson, ShapeIsStable) {
  const Document d = doc_of("\\section{A}\\label{s}Text $x$.", "\\title{T}");
  const auto j = to_json(d);
  EXPECT_TRUE(j.contains("metadata"));
  EXPECT_TRUE(j.contains("body"));
  EXPECT_TRUE(j.contains("diagnostics"));
  EXPECT_EQ(j["body"][0]["type"], "section");
  EXPECT_EQ(j["body"][0]["level"], 1);
}
