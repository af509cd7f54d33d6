#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "test_util.hpp"
#include "texhtml/package_registry.hpp"

using namespace texhtml;

namespace {

constexpr std::string_view sample = R"(# demo handler
package demo
kind implemented
structural \demobox 1 optional
math \demoop 0
ignored \demoskip 2
expandable \demohi 1 [World] = Hello, #1!
environment demoenv quote
environment demoproof transparent 1 optional
)";

}  // namespace

TEST(Handler, ParsesAllLineKinds) {
  const PackageHandler h = parse_handler(sample);
  EXPECT_EQ(h.name, "demo");
  EXPECT_EQ(h.kind, PackageKind::implemented);
  ASSERT_NE(h.find_macro("demobox"), nullptr);
  EXPECT_EQ(h.find_macro("demobox")->kind, MacroKind::structural);
  EXPECT_TRUE(h.find_macro("demobox")->optional_argument.has_value());
  EXPECT_EQ(h.find_macro("demoskip")->kind, MacroKind::ignored);
  EXPECT_EQ(h.find_macro("demoskip")->arity, 2);
  EXPECT_TRUE(h.redefinable.count("demoop"));
  const MacroDef* hi = h.find_macro("demohi");
  ASSERT_NE(hi, nullptr);
  EXPECT_EQ(detokenize(hi->body), "Hello, #1!");
  EXPECT_EQ(detokenize(*hi->optional_argument), "World");
  ASSERT_EQ(h.environments.size(), 2u);
  EXPECT_EQ(h.environments[1].role, EnvironmentRole::transparent);
  EXPECT_EQ(h.environments[1].arity, 1);
  EXPECT_TRUE(h.environments[1].optional);
}

TEST(Handler, SerializeRoundTrip) {
  const PackageHandler h = parse_handler(sample);
  const PackageHandler again = parse_handler(serialize_handler(h));
  EXPECT_EQ(serialize_handler(again), serialize_handler(h));
}

TEST(Handler, RejectsMalformedText) {
  EXPECT_THROW(parse_handler("kind implemented\n"), HandlerFormatError);
  EXPECT_THROW(parse_handler("package x\nstructural \\a notanumber\n"), HandlerFormatError);
  EXPECT_THROW(parse_handler("package x\nenvironment e nosuchrole\n"), HandlerFormatError);
  EXPECT_THROW(parse_handler("package x\nwhatever line\n"), HandlerFormatError);
  EXPECT_THROW(parse_handler("package x\nexpandable \\a 0 = #1\n"), HandlerFormatError);
}

TEST(Handler, DuplicateMacroNamesRejected) {
  EXPECT_THROW(parse_handler("package x\nstructural \\a 0\nignored \\a 1\n"), HandlerFormatError);
}

TEST(Registry, DefaultsResolve) {
  const PackageRegistry& r = testutil::registry();
  for (const char* name : {"amsmath", "amssymb", "graphicx", "hyperref", "url", "xcolor", "booktabs", "natbib"}) {
    ASSERT_NE(r.resolve(name), nullptr) << name;
    EXPECT_EQ(r.resolve(name)->kind, PackageKind::implemented) << name;
  }
  for (const char* name : {"geometry", "inputenc", "fontenc", "babel", "microtype"}) {
    ASSERT_NE(r.resolve(name), nullptr) << name;
    EXPECT_EQ(r.resolve(name)->kind, PackageKind::ignored_safe) << name;
  }
  EXPECT_EQ(r.resolve("tikz"), nullptr);
}

TEST(Registry, ResolveAllPartitionsRequest) {
  const std::vector<std::string> requested = {"amsmath", "tikz", "geometry", "pgfplots", "graphicx"};
  const RegistryOutcome o = testutil::registry().resolve_all(requested);
  EXPECT_EQ(o.implemented, (std::set<std::string>{"amsmath", "graphicx"}));
  EXPECT_EQ(o.ignored, (std::set<std::string>{"geometry"}));
  EXPECT_EQ(o.unknown, (std::set<std::string>{"pgfplots", "tikz"}));
  EXPECT_EQ(o.implemented.size() + o.ignored.size() + o.unknown.size(), requested.size());
}

TEST(Registry, LoadDirectoryAddsHandlers) {
  const auto dir = std::filesystem::temp_directory_path() / "texhtml-registry-test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "demo.pkg") << sample;
  std::ofstream(dir / "broken.pkg") << "package\n";
  PackageRegistry r = PackageRegistry::with_defaults();
  Diagnostics diags;
  EXPECT_EQ(r.load_directory(dir, &diags), 1u);
  EXPECT_FALSE(diags.empty());
  EXPECT_NE(r.resolve("demo"), nullptr);
  std::filesystem::remove_all(dir);
}

TEST(Registry, AddedHandlerDrivesConversion) {
  PackageRegistry r = PackageRegistry::with_defaults();
  r.add(parse_handler(sample));
  const ConversionResult result = convert_source(
      "\\documentclass{article}\\usepackage{demo}\\begin{document}\\demohi[Ann] \\demohi \\demoskip{a}{b}"
      "\\begin{demoenv}quoted\\end{demoenv}\\end{document}",
      "demo", r);
  ASSERT_TRUE(result.html.has_value());
  const std::string& html = result.html->html;
  EXPECT_NE(html.find("Hello, Ann!"), std::string::npos);
  EXPECT_NE(html.find("Hello, World!"), std::string::npos);
  EXPECT_EQ(html.find("demoskip"), std::string::npos);
  EXPECT_NE(html.find("<blockquote>"), std::string::npos);
  EXPECT_TRUE(result.unknown_packages.empty());
  EXPECT_FALSE(result.html->includes_banner);
}

TEST(Registry, PackagesNotRequestedStayInactive) {
  // \href without hyperref is shown as source.
  const ConversionResult r = testutil::run_body("\\href{http://x.org}{x}");
  EXPECT_TRUE(testutil::has_code(r.diagnostics, "unrendered-command"));
  const ConversionResult with = testutil::run_body("\\href{http://x.org}{x}", "\\usepackage{hyperref}\n");
  EXPECT_FALSE(testutil::has_code(with.diagnostics, "unrendered-command"));
}
