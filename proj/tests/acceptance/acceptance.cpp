// Acceptance checks. Prints one PASS/FAIL line per check and exits
// non-zero when any check fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "expansion_suite.hpp"
#include "generators.hpp"
#include "html_check.hpp"
#include "reference_lexer.hpp"
#include "texhtml/corpus.hpp"
#include "texhtml/issue_intake.hpp"
#include "texhtml/lexer.hpp"
#include "texhtml/macro_engine.hpp"
#include "texhtml/pipeline.hpp"

namespace fs = std::filesystem;
using namespace texhtml;

namespace {

int failures = 0;

void verdict(bool ok, std::string_view name, const std::string& detail) {
  std::cout << (ok ? "PASS  " : "FAIL  ") << name << "  " << detail << "\n" << std::flush;
  if (!ok) ++failures;
}

fs::path scratch_dir(std::string_view tag) {
  const fs::path dir = fs::temp_directory_path() / ("texhtml-acceptance-" + std::to_string(::getpid()) + "-" + std::string(tag));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Status/diagnostic consistency for one result; empty when it holds.
std::string consistency_problem(const ConversionResult& r) {
  const bool errors = has_severity(r.diagnostics, Severity::error);
  const bool warnings = has_severity(r.diagnostics, Severity::warning);
  if ((r.status == ConversionStatus::failed) != !r.html.has_value()) return "Failed does not match missing html";
  switch (r.status) {
    case ConversionStatus::errors_but_readable:
      if (!errors) return "ErrorsButReadable without an error";
      break;
    case ConversionStatus::success_with_warnings:
      if (errors || !warnings) return "SuccessWithWarnings with errors or without warnings";
      break;
    case ConversionStatus::success:
      if (errors || warnings) return "Success with non-info diagnostics";
      break;
    case ConversionStatus::failed:
      if (!errors) return "Failed without an error diagnostic";
      break;
  }
  return {};
}

std::string per_status_text(const CorpusReport& report) {
  std::ostringstream s;
  s << "perStatus{";
  bool first = true;
  for (const auto& [status, count] : report.per_status) {
    s << (first ? "" : ", ") << to_string(status) << ":" << count;
    first = false;
  }
  s << "}";
  return s.str();
}

// -------------------------------------------------------------- checks

void fixture_corpus_taxonomy(const PackageRegistry& registry) {
  const fs::path root = scratch_dir("corpus");
  const auto bundles = gen::fixture_corpus(20240501);
  gen::write_bundles(root, bundles);

  // Sequential oracle: each bundle converted on its own.
  std::map<std::string, ConversionStatus> sequential;
  std::string mismatch;
  for (const auto& b : bundles) {
    const ConversionResult r = convert(load_bundle(root / b.paper_id), registry);
    sequential[b.paper_id] = r.status;
    if (to_string(r.status) != gen::to_string(b.intended) && mismatch.empty()) {
      mismatch = b.paper_id + " (" + b.note + ") is " + std::string(to_string(r.status));
    }
  }

  BatchOptions options;
  options.jobs = 4;
  options.cost_per_article = *Money::parse("0.015");
  const CorpusReport report = run_batch(root, registry, options);
  for (const PaperRecord& p : report.papers) {
    if (sequential[p.paper_id] != p.status && mismatch.empty()) mismatch = p.paper_id + " differs under parallelism";
  }

  const auto count = [&](ConversionStatus s) { return report.per_status.at(s); };
  const bool counts = report.total == 100 && count(ConversionStatus::success) == 53 &&
                      count(ConversionStatus::success_with_warnings) == 22 &&
                      count(ConversionStatus::errors_but_readable) == 22 && count(ConversionStatus::failed) == 3;
  const bool rates = report.fail_rate == 0.03 && report.error_rate == 0.25;
  const bool fast = report.elapsed_seconds < 60.0;
  char detail[256];
  std::snprintf(detail, sizeof detail, " failRate %.1f%% errorRate %.1f%% in %.2fs at parallelism %d",
                report.fail_rate * 100, report.error_rate * 100, report.elapsed_seconds, report.parallelism);
  verdict(counts && rates && fast && mismatch.empty(), "fixture-corpus-taxonomy",
          per_status_text(report) + detail + (mismatch.empty() ? "" : "; " + mismatch));
  fs::remove_all(root);
}

void cost_model() {
  const Money per = *Money::parse("$0.015");
  const Money total = estimate_cost(2'000'000, per);
  bool ok = total == *Money::parse("$30,000") && total.format() == "$30,000.00";

  std::mt19937_64 rng(7);
  int broken = 0;
  for (int i = 0; i < 200; ++i) {
    const std::uint64_t n = std::uniform_int_distribution<std::uint64_t>(0, 50'000'000)(rng);
    const std::uint64_t a = std::uniform_int_distribution<std::uint64_t>(0, n)(rng);
    const Money price = Money::from_micros(std::uniform_int_distribution<std::int64_t>(0, 5'000'000)(rng));
    if (estimate_cost(a, price) + estimate_cost(n - a, price) != estimate_cost(n, price)) ++broken;
  }
  verdict(ok && broken == 0, "cost-model",
          "estimateCost(2,000,000, $0.015) = " + total.format() + "; linearity broken in " + std::to_string(broken) +
              "/200 splits");
}

struct FuzzOutcome {
  std::vector<ConversionResult> results;
  std::vector<gen::FuzzDoc> docs;
};

FuzzOutcome run_document_fuzz(const PackageRegistry& registry) {
  FuzzOutcome out;
  gen::Rng rng(99);
  for (std::size_t i = 0; i < 1000; ++i) {
    out.docs.push_back(gen::fuzz_document(rng, i));
    out.results.push_back(convert_source(out.docs.back().source, "fuzzdoc" + std::to_string(i), registry));
  }
  return out;
}

void unknown_command_passthrough(const FuzzOutcome& fuzz) {
  std::size_t contained = 0;
  std::string first_miss;
  for (std::size_t i = 0; i < fuzz.docs.size(); ++i) {
    const auto& r = fuzz.results[i];
    if (r.html && r.html->html.find(fuzz.docs[i].command_text) != std::string::npos) {
      ++contained;
    } else if (first_miss.empty()) {
      first_miss = "; missing " + fuzz.docs[i].command_text + " (" + std::string(to_string(r.status)) + ")";
    }
  }
  verdict(contained == fuzz.docs.size(), "unknown-command-passthrough",
          std::to_string(contained) + "/" + std::to_string(fuzz.docs.size()) + " pages contain their command" +
              first_miss);
}

void banner_iff_unknown_package(const FuzzOutcome& fuzz, const std::vector<ConversionResult>& bundles) {
  std::size_t pages = 0;
  std::size_t with_banner = 0;
  std::size_t exceptions = 0;
  std::string first;
  auto check = [&](const ConversionResult& r, const std::set<std::string>* expected) {
    if (!r.html) return;
    ++pages;
    const bool banner = r.html->includes_banner;
    const bool marked = r.html->html.find("class=\"unsupported-banner\"") != std::string::npos;
    with_banner += banner;
    const bool ok = banner == !r.unknown_packages.empty() && marked == banner &&
                    (expected == nullptr || *expected == r.unknown_packages);
    if (!ok) {
      ++exceptions;
      if (first.empty()) first = "; first exception " + r.paper_id;
    }
  };
  for (std::size_t i = 0; i < fuzz.docs.size(); ++i) check(fuzz.results[i], &fuzz.docs[i].unknown_packages);
  for (const auto& r : bundles) check(r, nullptr);
  verdict(exceptions == 0, "banner-iff-unknown-package",
          std::to_string(pages) + " pages, " + std::to_string(with_banner) + " with banner, " +
              std::to_string(exceptions) + " exceptions" + first);
}

void structure_conservation(const PackageRegistry& registry) {
  gen::Rng rng(5150);
  std::size_t mismatches = 0;
  std::size_t commands = 0;
  std::string first;
  for (int i = 0; i < 500; ++i) {
    const gen::StructuredDoc doc = gen::structured_document(rng);
    commands += doc.levels.size();
    const ConversionResult r = convert_source(doc.source, "struct" + std::to_string(i), registry);
    std::vector<int> headings;
    if (r.html) {
      for (const auto& e : htmlcheck::check(r.html->html).elements) {
        if (e.name.size() == 2 && e.name[0] == 'h' && e.name[1] >= '1' && e.name[1] <= '6') {
          const auto cls = e.attributes.find("class");
          if (e.name == "h1" && cls != e.attributes.end() && cls->second == "title") continue;
          headings.push_back(e.name[1] - '0');
        }
      }
    }
    std::vector<int> expected;
    for (const int level : doc.levels) expected.push_back(level + 1);
    if (headings != expected) {
      ++mismatches;
      if (first.empty()) first = "; first mismatch in document " + std::to_string(i);
    }
  }
  verdict(mismatches == 0, "structure-conservation",
          "500 documents, " + std::to_string(commands) + " sectioning commands, " + std::to_string(mismatches) +
              " mismatches" + first);
}

void oracle_equivalence() {
  std::size_t lexer_ok = 0;
  std::size_t expand_ok = 0;
  std::string first;
  const auto& suite = oracle::expansion_suite();
  for (const auto& program : suite) {
    const LexResult lexed = tokenize(program.source);
    if (oracle::serialize(oracle::from_tokens(lexed.tokens)) ==
        oracle::serialize(oracle::reference_tokenize(program.source))) {
      ++lexer_ok;
    } else if (first.empty()) {
      first = "; tokenizer differs on " + std::string(program.name);
    }

    MacroEnvironment env;
    Diagnostics diags;
    if (program.structural_section) env.define(make_macro("section", 1, "", MacroKind::structural), diags);
    ExpansionBudget budget;
    budget.fuel = program.fuel;
    const ExpansionResult expanded = expand(lexed.tokens, env, budget);
    const bool failure_ok = program.expect_fuel_exhausted
                                ? expanded.failure == ExpansionFailure::fuel_exhausted
                                : !expanded.failure.has_value();
    const bool stream_ok = program.expect_fuel_exhausted ||
                           oracle::serialize(oracle::from_tokens(expanded.tokens)) ==
                               oracle::serialize(oracle::reference_tokenize(program.expected));
    if (failure_ok && stream_ok) {
      ++expand_ok;
    } else if (first.empty()) {
      first = "; expansion differs on " + std::string(program.name);
    }
  }
  verdict(lexer_ok == suite.size() && expand_ok == suite.size() && suite.size() == 20, "oracle-equivalence",
          "tokenizer " + std::to_string(lexer_ok) + "/" + std::to_string(suite.size()) + ", expander " +
              std::to_string(expand_ok) + "/" + std::to_string(suite.size()) + first);
}

std::vector<ConversionResult> crash_freedom(const PackageRegistry& registry) {
  gen::Rng rng(31337);
  std::vector<ConversionResult> results;
  std::size_t abnormal = 0;
  std::size_t inconsistent = 0;
  std::map<ConversionStatus, std::size_t> seen;
  std::string first;
  for (std::size_t i = 0; i < 10'000; ++i) {
    const SourceBundle bundle = gen::random_bundle(rng, i);
    try {
      ConversionResult r = convert(bundle, registry);
      ++seen[r.status];
      if (const std::string problem = consistency_problem(r); !problem.empty()) {
        ++inconsistent;
        if (first.empty()) first = "; " + r.paper_id + ": " + problem;
      }
      results.push_back(std::move(r));
    } catch (...) {
      ++abnormal;
    }
  }
  std::ostringstream detail;
  detail << "10000 bundles, " << abnormal << " abnormal, " << inconsistent << " inconsistent (";
  for (const auto& [status, n] : seen) detail << to_string(status) << ":" << n << " ";
  detail << ")" << first;
  verdict(abnormal == 0 && inconsistent == 0, "crash-freedom", detail.str());
  return results;
}

void html_validity(const FuzzOutcome& fuzz, const std::vector<ConversionResult>& bundles) {
  std::size_t pages = 0;
  std::size_t valid = 0;
  std::size_t one_dark_rule = 0;
  std::string first;
  auto check = [&](const ConversionResult& r) {
    if (!r.html) return;
    ++pages;
    const htmlcheck::Report report = htmlcheck::check(r.html->html);
    valid += report.ok;
    one_dark_rule += report.dark_scheme_rules == 1;
    if ((!report.ok || report.dark_scheme_rules != 1) && first.empty()) {
      first = "; " + r.paper_id + ": " + (report.ok ? "dark rules " + std::to_string(report.dark_scheme_rules) : report.error);
    }
  };
  for (const auto& r : fuzz.results) check(r);
  for (const auto& r : bundles) check(r);
  verdict(pages > 0 && valid == pages && one_dark_rule == pages, "html-validity",
          std::to_string(valid) + "/" + std::to_string(pages) + " well-formed, " + std::to_string(one_dark_rule) + "/" +
              std::to_string(pages) + " with exactly one dark-scheme rule" + first);
}

void issue_intake_dedup() {
  const fs::path dir = scratch_dir("intake");
  const fs::path file = dir / "reports.ndjson";

  // Each step names a paper, a snippet group (-1: no snippet) and how the
  // snippet is dressed up. Same paper and group means the same issue.
  struct Step {
    int paper;
    int group;
    int variant;
  };
  static const char* snippets[] = {"the flux integral",     "Equation (3) renders as source",
                                   "missing figure caption", "table columns overlap",
                                   "Théorème 2 is cut off"};
  auto dress = [](std::string s, int variant) {
    switch (variant % 4) {
      case 1: return "  " + s + "\n";
      case 2: {
        for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return s;
      }
      case 3: {
        std::string spaced;
        for (const char c : s) spaced += c == ' ' ? std::string(" \t ") : std::string(1, c);
        return spaced;
      }
      default: return s;
    }
  };
  std::vector<Step> steps;
  gen::Rng rng(424242);
  for (int i = 0; i < 50; ++i) {
    const int paper = i < 10 ? i : static_cast<int>(rng() % 10);
    const int group = rng() % 7 == 0 ? -1 : static_cast<int>(rng() % 3 + (paper % 2) * 2);
    steps.push_back({paper, group, static_cast<int>(rng() % 4)});
  }

  std::int64_t now = 1'700'000'000'000;
  IssueStore store(file, [&] { return now += 1000; });
  std::map<std::pair<int, int>, std::string> first_report;
  std::size_t predicted_duplicates = 0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const Step& s = steps[i];
    std::optional<std::string> snippet;
    if (s.group >= 0) snippet = dress(snippets[s.group], s.variant);
    const SubmitResult result = store.submit("paper" + std::to_string(s.paper), snippet, "report " + std::to_string(i));
    std::optional<std::string> predicted;
    if (s.group >= 0) {
      const auto key = std::make_pair(s.paper, s.group);
      if (const auto it = first_report.find(key); it != first_report.end()) {
        predicted = it->second;
        ++predicted_duplicates;
      } else {
        first_report[key] = result.report_id;
      }
    }
    agree += result.duplicate_of == predicted;
  }

  const std::vector<IssueReport> before = store.all();
  std::ifstream in(file, std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  IssueStore restarted(file);
  std::string rewritten;
  for (const IssueReport& r : restarted.all()) rewritten += to_json(r).dump() + "\n";
  bool lists_equal = true;
  for (int p = 0; p < 10; ++p) {
    const std::string id = "paper" + std::to_string(p);
    lists_equal = lists_equal && store.list(id) == restarted.list(id);
  }
  const bool round_trip = restarted.all() == before && rewritten == bytes && lists_equal &&
                          restarted.skipped_lines() == 0;

  // Dedup state survives the restart too.
  const Step& replay = steps.front();
  bool dedup_survives = true;
  if (replay.group >= 0) {
    const SubmitResult again =
        restarted.submit("paper" + std::to_string(replay.paper), std::string(snippets[replay.group]), "after restart");
    dedup_survives = again.duplicate_of == first_report.at(std::make_pair(replay.paper, replay.group));
  }
  verdict(agree == steps.size() && round_trip && dedup_survives, "issue-intake-dedup",
          std::to_string(agree) + "/50 submissions match the predicted partition (" +
              std::to_string(50 - predicted_duplicates) + " primary, " + std::to_string(predicted_duplicates) +
              " duplicate); restart round-trip " + (round_trip ? "bit-exact" : "differs") +
              (dedup_survives ? "" : "; dedup lost after restart"));
  fs::remove_all(dir);
}

}  // namespace

int main() {
  const PackageRegistry registry = PackageRegistry::with_defaults();
  const auto start = std::chrono::steady_clock::now();

  fixture_corpus_taxonomy(registry);
  cost_model();
  const FuzzOutcome fuzz = run_document_fuzz(registry);
  unknown_command_passthrough(fuzz);
  const std::vector<ConversionResult> bundles = crash_freedom(registry);
  banner_iff_unknown_package(fuzz, bundles);
  structure_conservation(registry);
  oracle_equivalence();
  html_validity(fuzz, bundles);
  issue_intake_dedup();

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed") << " in "
            << seconds << "s\n";
  return failures == 0 ? 0 : 1;
}
