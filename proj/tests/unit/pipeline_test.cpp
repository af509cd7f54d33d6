#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "test_util.hpp"
#include "texhtml/pipeline.hpp"

using namespace texhtml;
using testutil::has_code;

namespace {

Diagnostics with(Severity s) {
  Diagnostics d;
  report(d, s, Stage::parser, "x", "x");
  return d;
}

}  // namespace

TEST(Classify, FourWayTaxonomy) {
  EXPECT_EQ(classify({}, true), ConversionStatus::success);
  EXPECT_EQ(classify(with(Severity::info), true), ConversionStatus::success);
  EXPECT_EQ(classify(with(Severity::warning), true), ConversionStatus::success_with_warnings);
  EXPECT_EQ(classify(with(Severity::error), true), ConversionStatus::errors_but_readable);
  EXPECT_EQ(classify({}, false), ConversionStatus::failed);
  EXPECT_EQ(classify(with(Severity::error), false), ConversionStatus::failed);
}

TEST(Classify, StatusNamesRoundTrip) {
  for (auto s : {ConversionStatus::success, ConversionStatus::success_with_warnings,
                 ConversionStatus::errors_but_readable, ConversionStatus::failed}) {
    EXPECT_EQ(status_from_string(to_string(s)), s);
  }
  EXPECT_EQ(to_string(ConversionStatus::success_with_warnings), "SuccessWithWarnings");
  EXPECT_FALSE(status_from_string("success").has_value());
}

TEST(MainFile, DetectedByDocumentclass) {
  Diagnostics d;
  EXPECT_EQ(detect_main_file({{"a.tex", "\\section{x}"}, {"paper.tex", "\\documentclass{article}"}}, d), "paper.tex");
  EXPECT_TRUE(d.empty());
}

TEST(MainFile, CommentedDocumentclassIgnored) {
  Diagnostics d;
  EXPECT_FALSE(detect_main_file({{"a.tex", "% \\documentclass{article}\n"}}, d).has_value());
}

TEST(MainFile, EscapedBackslashesCounted) {
  Diagnostics d;
  EXPECT_FALSE(detect_main_file({{"a.tex", "line break \\\\documentclass"}}, d).has_value());
  EXPECT_FALSE(detect_main_file({{"b.tex", "x \\\\% \\documentclass{article}"}}, d).has_value());
  EXPECT_EQ(detect_main_file({{"c.tex", "50\\% off \\documentclass{article}"}}, d), "c.tex");
}

TEST(MainFile, TieBrokenLexicographicallyWithWarning) {
  Diagnostics d;
  EXPECT_EQ(detect_main_file({{"z.tex", "\\documentclass{a}"}, {"b.tex", "\\documentclass{a}"}}, d), "b.tex");
  EXPECT_TRUE(has_code(d, "multiple-main-files"));
}

TEST(Convert, CleanDocumentSucceeds) {
  const ConversionResult r = testutil::run_body("Hello \\emph{world}.");
  EXPECT_EQ(r.status, ConversionStatus::success);
  EXPECT_EQ(exit_code(r), 0);
  ASSERT_TRUE(r.html.has_value());
}

TEST(Convert, InvalidBundleExitsThree) {
  SourceBundle b;
  b.paper_id = "empty";
  b.files["notes.txt"] = "nothing here";
  const ConversionResult r = convert(b, testutil::registry());
  EXPECT_EQ(r.status, ConversionStatus::failed);
  EXPECT_TRUE(r.bundle_invalid);
  EXPECT_EQ(exit_code(r), 3);
  EXPECT_TRUE(has_code(r.diagnostics, "no-main-file"));
}

TEST(Convert, NamedMainFileMissing) {
  SourceBundle b;
  b.paper_id = "p";
  b.files["main.tex"] = "\\documentclass{article}\\begin{document}x\\end{document}";
  b.main_file = "other.tex";
  const ConversionResult r = convert(b, testutil::registry());
  EXPECT_TRUE(has_code(r.diagnostics, "main-file-missing"));
  EXPECT_EQ(exit_code(r), 3);
}

TEST(Convert, RunawayMacroFails) {
  ConvertOptions options;
  options.fuel = 10'000;
  const ConversionResult r = convert_source(
      "\\documentclass{article}\\def\\loop{\\loop}\\begin{document}\\loop\\end{document}", "loop", testutil::registry(),
      options);
  EXPECT_EQ(r.status, ConversionStatus::failed);
  EXPECT_FALSE(r.html.has_value());
  EXPECT_EQ(exit_code(r), 2);
  EXPECT_TRUE(has_severity(r.diagnostics, Severity::error));
}

TEST(Convert, EmptyDocumentFails) {
  const ConversionResult r = testutil::run("\\documentclass{article}\\begin{document}\\end{document}");
  EXPECT_EQ(r.status, ConversionStatus::failed);
  EXPECT_TRUE(has_code(r.diagnostics, "emitter-failure"));
}

TEST(Convert, ErrorsStillProducePage) {
  const ConversionResult r = testutil::run_body("Broken $math\n\nrest");
  EXPECT_EQ(r.status, ConversionStatus::errors_but_readable);
  EXPECT_EQ(exit_code(r), 1);
  EXPECT_TRUE(r.html.has_value());
}

TEST(Convert, UnsupportedPackageBannerAndWarning) {
  const ConversionResult r = testutil::run_body("x", "\\usepackage{tikz}");
  EXPECT_EQ(r.unknown_packages, (std::set<std::string>{"tikz"}));
  ASSERT_TRUE(r.html.has_value());
  EXPECT_TRUE(r.html->includes_banner);
  EXPECT_NE(r.status, ConversionStatus::success);
}

TEST(Convert, InputResolvedInsideBundle) {
  SourceBundle b;
  b.paper_id = "inputs";
  b.files["main.tex"] = "\\documentclass{article}\\begin{document}\\input{sec/intro}\\input{missing}\\end{document}";
  b.files["sec/intro.tex"] = "Included text.";
  const ConversionResult r = convert(b, testutil::registry());
  ASSERT_TRUE(r.html.has_value());
  EXPECT_NE(r.html->html.find("Included text."), std::string::npos);
  EXPECT_TRUE(has_code(r.diagnostics, "missing-input"));
  EXPECT_EQ(r.main_file, "main.tex");
}

TEST(Convert, RecursiveInputStops) {
  SourceBundle b;
  b.paper_id = "rec";
  b.files["main.tex"] = "\\documentclass{article}\\begin{document}x\\input{a}\\end{document}";
  b.files["a.tex"] = "a\\input{a}";
  const ConversionResult r = convert(b, testutil::registry());
  EXPECT_TRUE(has_code(r.diagnostics, "recursive-input"));
  EXPECT_TRUE(r.html.has_value());
}

TEST(Convert, BinaryGarbageDoesNotThrow) {
  std::string junk = "\\documentclass{article}\\begin{document}";
  for (int i = 0; i < 4096; ++i) junk += static_cast<char>((i * 131 + 7) % 256);
  EXPECT_NO_THROW({
    const ConversionResult r = testutil::run(junk);
    EXPECT_EQ(r.html.has_value(), r.status != ConversionStatus::failed);
  });
}

TEST(Bundle, LoadReadsNestedFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "texhtml-bundle-test" / "2401.12345";
  std::filesystem::create_directories(dir / "figs");
  std::ofstream(dir / "main.tex") << "\\documentclass{article}";
  std::ofstream(dir / "figs" / "a.tex") << "fig";
  const SourceBundle b = load_bundle(dir);
  EXPECT_EQ(b.paper_id, "2401.12345");
  EXPECT_EQ(b.files.size(), 2u);
  EXPECT_EQ(b.files.at("figs/a.tex"), "fig");
  std::filesystem::remove_all(dir.parent_path());
}
