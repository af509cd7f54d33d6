#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>

#include "test_util.hpp"
#include "texhtml/corpus.hpp"

using namespace texhtml;

TEST(Money, Parse) {
  EXPECT_EQ(Money::parse("0.015")->micros(), 15'000);
  EXPECT_EQ(Money::parse("$1,250.50")->micros(), 1'250'500'000);
  EXPECT_EQ(Money::parse("30000")->micros(), 30'000'000'000);
  for (const char* bad : {"", "$", "abc", "1.0000001", "-1", "1..2", "1,2,3.x"}) {
    EXPECT_FALSE(Money::parse(bad).has_value()) << bad;
  }
}

TEST(Money, Format) {
  EXPECT_EQ(Money::from_micros(30'000'000'000).format(), "$30,000.00");
  EXPECT_EQ(Money::from_micros(15'000).format(), "$0.015");
  EXPECT_EQ(Money::from_micros(1'000'000).format(), "$1.00");
  EXPECT_EQ(Money::from_micros(123'456'789).format(), "$123.456789");
  EXPECT_EQ(Money::from_micros(30'000'000'000).decimal(), "30000.00");
}

TEST(Money, EstimateCost) {
  EXPECT_EQ(estimate_cost(2'000'000, *Money::parse("0.015")).format(), "$30,000.00");
  EXPECT_EQ(estimate_cost(0, *Money::parse("0.015")).micros(), 0);
  EXPECT_THROW(estimate_cost(std::numeric_limits<std::uint64_t>::max(), Money::from_micros(1)), std::overflow_error);
  EXPECT_THROW(estimate_cost(1'000'000'000'000, Money::from_micros(1'000'000'000)), std::overflow_error);
}

namespace {

PaperRecord paper(std::string id, ConversionStatus s, std::set<std::string> unknown = {},
                  std::string version = std::string(converter_version)) {
  PaperRecord p;
  p.paper_id = std::move(id);
  p.status = s;
  p.unknown_packages = std::move(unknown);
  p.converter_version = std::move(version);
  return p;
}

}  // namespace

TEST(Report, SummarizeRates) {
  CorpusReport r;
  r.cost_per_article = Money::from_micros(15'000);
  r.papers = {paper("a", ConversionStatus::success), paper("b", ConversionStatus::success_with_warnings),
              paper("c", ConversionStatus::errors_but_readable), paper("d", ConversionStatus::failed)};
  summarize(r);
  EXPECT_EQ(r.total, 4u);
  EXPECT_DOUBLE_EQ(r.error_rate, 0.5);
  EXPECT_DOUBLE_EQ(r.fail_rate, 0.25);
  EXPECT_EQ(r.cost_estimate.micros(), 60'000);
  EXPECT_EQ(r.per_status[ConversionStatus::success], 1u);
}

TEST(Report, JsonRoundTrip) {
  CorpusReport r;
  r.cost_per_article = Money::from_micros(15'000);
  r.converter_version = std::string(converter_version);
  r.parallelism = 4;
  r.papers = {paper("a", ConversionStatus::success), paper("b", ConversionStatus::failed, {"tikz"})};
  r.papers[1].first_errors = {"boom"};
  summarize(r);
  const auto j = to_json(r);
  EXPECT_EQ(j["perStatus"]["Failed"], 1);
  EXPECT_EQ(j["costEstimate"], "0.03");
  const CorpusReport back = report_from_json(j);
  EXPECT_EQ(to_json(back).dump(), j.dump());
  EXPECT_THROW(report_from_json(nlohmann::json{{"papers", 3}}), std::invalid_argument);
}

TEST(Plan, VersionAndPackageTriggers) {
  CorpusReport prev;
  prev.papers = {paper("a", ConversionStatus::success), paper("b", ConversionStatus::success, {"tikz"}),
                 paper("c", ConversionStatus::success, {"minted"}, "texhtml 0.9.0"),
                 paper("d", ConversionStatus::failed, {"pgfplots", "tikz"})};
  EXPECT_EQ(plan_reconversion(prev, converter_version, {"tikz"}), (std::vector<std::string>{"b", "c", "d"}));
  EXPECT_EQ(plan_reconversion(prev, converter_version, {}), (std::vector<std::string>{"c"}));
  EXPECT_EQ(plan_reconversion(prev, "texhtml 2.0.0", {}).size(), 4u);
}

TEST(Batch, ConvertsEachSubdirectory) {
  const auto root = std::filesystem::temp_directory_path() / "texhtml-batch-test";
  std::filesystem::remove_all(root);
  const auto write = [&](const std::string& id, const std::string& text) {
    std::filesystem::create_directories(root / id);
    std::ofstream(root / id / "main.tex") << text;
  };
  write("ok", "\\documentclass{article}\\begin{document}Fine.\\end{document}");
  write("warn", "\\documentclass{article}\\usepackage{tikz}\\begin{document}Fine.\\end{document}");
  write("err", "\\documentclass{article}\\begin{document}Bad $x\n\ny\\end{document}");
  write("fail", "\\documentclass{article}\\def\\a{\\a}\\begin{document}\\a\\end{document}");
  BatchOptions options;
  options.jobs = 3;
  options.convert.fuel = 5000;
  const CorpusReport r = run_batch(root, testutil::registry(), options);
  ASSERT_EQ(r.total, 4u);
  EXPECT_EQ(r.papers.front().paper_id, "err");
  for (auto s : {ConversionStatus::success, ConversionStatus::success_with_warnings,
                 ConversionStatus::errors_but_readable, ConversionStatus::failed}) {
    EXPECT_EQ(r.per_status.at(s), 1u) << to_string(s);
  }
  EXPECT_TRUE(std::filesystem::exists(root / "ok" / "ok.html"));
  EXPECT_FALSE(std::filesystem::exists(root / "fail" / "fail.html"));
  EXPECT_EQ(r.parallelism, 3);
  EXPECT_NE(to_text(r).find("Failed"), std::string::npos);
  std::filesystem::remove_all(root);
}

TEST(Batch, MissingCorpusThrows) {
  EXPECT_THROW(run_batch("/nonexistent/corpus/dir", testutil::registry()), CorpusUnreadable);
}
