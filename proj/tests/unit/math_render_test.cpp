#include <gtest/gtest.h>

#include "html_check.hpp"
#include "texhtml/math_render.hpp"

using namespace texhtml;

namespace {

std::string mathml(std::string_view tex, bool display = false) {
  const MathRender r = render_math(tex, display);
  EXPECT_TRUE(r.mathml.has_value()) << tex << ": " << r.unsupported;
  return r.mathml.value_or("");
}

bool contains(const std::string& haystack, std::string_view needle) { return haystack.find(needle) != std::string::npos; }

}  // namespace

TEST(Math, Scripts) {
  EXPECT_TRUE(contains(mathml("x^2"), "<msup><mi>x</mi><mn>2</mn></msup>"));
  EXPECT_TRUE(contains(mathml("a_i"), "<msub><mi>a</mi><mi>i</mi></msub>"));
  EXPECT_TRUE(contains(mathml("a_i^2"), "<msubsup>"));
  EXPECT_TRUE(contains(mathml("f'"), "\xE2\x80\xB2"));
}

TEST(Math, FractionsAndRoots) {
  EXPECT_TRUE(contains(mathml("\\frac{a}{b}"), "<mfrac><mi>a</mi><mi>b</mi></mfrac>"));
  EXPECT_TRUE(contains(mathml("\\sqrt{x}"), "<msqrt><mi>x</mi></msqrt>"));
  EXPECT_TRUE(contains(mathml("\\sqrt[3]{x}"), "<mroot>"));
}

TEST(Math, SymbolsAndFonts) {
  EXPECT_TRUE(contains(mathml("\\alpha"), "\xCE\xB1"));
  EXPECT_TRUE(contains(mathml("\\leq"), "<mo>\xE2\x89\xA4</mo>"));
  EXPECT_TRUE(contains(mathml("\\mathbf{v}"), "mathvariant=\"bold\""));
  EXPECT_TRUE(contains(mathml("\\sin x"), "<mi>sin</mi>"));
  EXPECT_TRUE(contains(mathml("\\text{if } x"), "<mtext>"));
}

TEST(Math, DisplayAttribute) {
  EXPECT_TRUE(contains(mathml("x", true), "display=\"block\""));
  EXPECT_FALSE(contains(mathml("x", false), "display=\"block\""));
}

TEST(Math, EscapesOperators) {
  const std::string m = mathml("a < b > c");
  EXPECT_TRUE(contains(m, "&lt;"));
  EXPECT_TRUE(contains(m, "&gt;"));
}

TEST(Math, UnsupportedConstructsReported) {
  for (const char* tex : {"a & b \\\\ c", "\\unknownmacro{x}", "\\begin{matrix}a\\end{matrix}"}) {
    const MathRender r = render_math(tex, true);
    EXPECT_FALSE(r.mathml.has_value()) << tex;
    EXPECT_FALSE(r.unsupported.empty()) << tex;
  }
}

TEST(Math, OutputIsBalanced) {
  for (const char* tex : {"\\frac{\\sqrt{x^2+y^2}}{2}", "\\left( \\sum_{i=1}^n a_i \\right)", "x_{i_{j_k}}",
                          "{{{a}}}", "\\int_0^\\infty e^{-x}\\,dx"}) {
    const std::string page = "<html><body>" + mathml(tex) + "</body></html>";
    const htmlcheck::Report r = htmlcheck::check(page);
    EXPECT_TRUE(r.ok) << tex << ": " << r.error;
  }
}

TEST(Math, DeepNestingFallsBack) {
  const std::string deep = std::string(1000, '{') + "x" + std::string(1000, '}');
  const MathRender r = render_math(deep, false);
  EXPECT_FALSE(r.mathml.has_value());
}

TEST(Math, EscapeHtml) { EXPECT_EQ(escape_html("<a href=\"x\">&'"), "&lt;a href=&quot;x&quot;&gt;&amp;&#39;"); }
