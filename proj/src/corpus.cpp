#include "texhtml/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

namespace texhtml {

// ------------------------------------------------------------------ money

std::optional<Money> Money::parse(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (!text.empty() && text.front() == '$') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;

  std::int64_t whole = 0;
  std::int64_t fraction = 0;
  int fraction_digits = 0;
  bool seen_point = false;
  bool seen_digit = false;
  for (const char c : text) {
    if (c == ',' && !seen_point) continue;
    if (c == '.' && !seen_point) {
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') return std::nullopt;
    seen_digit = true;
    const int d = c - '0';
    if (seen_point) {
      if (++fraction_digits > 6) return std::nullopt;
      fraction = fraction * 10 + d;
    } else {
      if (__builtin_mul_overflow(whole, 10, &whole) || __builtin_add_overflow(whole, d, &whole)) {
        return std::nullopt;
      }
    }
  }
  if (!seen_digit) return std::nullopt;
  for (int i = fraction_digits; i < 6; ++i) fraction *= 10;
  std::int64_t micros = 0;
  if (__builtin_mul_overflow(whole, 1'000'000, &micros) || __builtin_add_overflow(micros, fraction, &micros)) {
    return std::nullopt;
  }
  return Money(micros);
}

std::string Money::decimal() const {
  const bool negative = micros_ < 0;
  const std::uint64_t abs = negative ? 0 - static_cast<std::uint64_t>(micros_) : static_cast<std::uint64_t>(micros_);
  std::string frac = std::to_string(abs % 1'000'000);
  frac.insert(0, 6 - frac.size(), '0');
  while (frac.size() > 2 && frac.back() == '0') frac.pop_back();
  return (negative ? "-" : "") + std::to_string(abs / 1'000'000) + "." + frac;
}

std::string Money::format() const {
  std::string d = decimal();
  const bool negative = !d.empty() && d.front() == '-';
  if (negative) d.erase(0, 1);
  const auto point = d.find('.');
  std::string whole = d.substr(0, point);
  for (int i = static_cast<int>(whole.size()) - 3; i > 0; i -= 3) whole.insert(static_cast<std::size_t>(i), ",");
  return (negative ? "-$" : "$") + whole + d.substr(point);
}

Money operator+(Money a, Money b) {
  std::int64_t sum = 0;
  if (__builtin_add_overflow(a.micros_, b.micros_, &sum)) throw std::overflow_error("money overflow");
  return Money(sum);
}

Money estimate_cost(std::uint64_t articles, Money per_article) {
  if (articles > static_cast<std::uint64_t>(INT64_MAX)) throw std::overflow_error("article count too large");
  std::int64_t product = 0;
  if (__builtin_mul_overflow(static_cast<std::int64_t>(articles), per_article.micros(), &product)) {
    throw std::overflow_error("cost estimate overflow");
  }
  return Money::from_micros(product);
}

// ----------------------------------------------------------------- report

void summarize(CorpusReport& report) {
  report.total = report.papers.size();
  report.per_status.clear();
  for (const ConversionStatus s : {ConversionStatus::success, ConversionStatus::success_with_warnings,
                                   ConversionStatus::errors_but_readable, ConversionStatus::failed}) {
    report.per_status[s] = 0;
  }
  for (const PaperRecord& p : report.papers) ++report.per_status[p.status];
  const auto failed = report.per_status[ConversionStatus::failed];
  const auto errors = report.per_status[ConversionStatus::errors_but_readable] + failed;
  report.fail_rate = report.total == 0 ? 0.0 : static_cast<double>(failed) / static_cast<double>(report.total);
  report.error_rate = report.total == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(report.total);
  report.cost_estimate = estimate_cost(report.total, report.cost_per_article);
}

nlohmann::ordered_json to_json(const CorpusReport& report) {
  using json = nlohmann::ordered_json;
  json per_status = json::object();
  for (const auto& [status, count] : report.per_status) per_status[std::string(to_string(status))] = count;
  json papers = json::array();
  for (const PaperRecord& p : report.papers) {
    papers.push_back({{"paperId", p.paper_id},
                      {"status", to_string(p.status)},
                      {"errors", p.errors},
                      {"warnings", p.warnings},
                      {"infos", p.infos},
                      {"unknownPackages", p.unknown_packages},
                      {"converterVersion", p.converter_version},
                      {"elapsedMs", p.elapsed_ms},
                      {"mainFile", p.main_file},
                      {"html", p.html_path},
                      {"firstErrors", p.first_errors}});
  }
  return json{{"converterVersion", report.converter_version},
              {"total", report.total},
              {"perStatus", std::move(per_status)},
              {"errorRate", report.error_rate},
              {"failRate", report.fail_rate},
              {"costPerArticle", report.cost_per_article.decimal()},
              {"costEstimate", report.cost_estimate.decimal()},
              {"costEstimateMicros", report.cost_estimate.micros()},
              {"elapsedSeconds", report.elapsed_seconds},
              {"parallelism", report.parallelism},
              {"papers", std::move(papers)}};
}

CorpusReport report_from_json(const nlohmann::json& j) {
  try {
    CorpusReport report;
    report.converter_version = j.value("converterVersion", "");
    report.parallelism = j.value("parallelism", 1);
    report.elapsed_seconds = j.value("elapsedSeconds", 0.0);
    const auto cost = Money::parse(j.value("costPerArticle", "0"));
    if (!cost) throw std::invalid_argument("bad costPerArticle");
    report.cost_per_article = *cost;
    for (const auto& p : j.at("papers")) {
      PaperRecord r;
      r.paper_id = p.at("paperId").get<std::string>();
      const auto status = status_from_string(p.at("status").get<std::string>());
      if (!status) throw std::invalid_argument("unknown status for " + r.paper_id);
      r.status = *status;
      r.errors = p.value("errors", std::size_t{0});
      r.warnings = p.value("warnings", std::size_t{0});
      r.infos = p.value("infos", std::size_t{0});
      r.unknown_packages = p.value("unknownPackages", std::set<std::string>{});
      r.converter_version = p.value("converterVersion", report.converter_version);
      r.elapsed_ms = p.value("elapsedMs", 0.0);
      r.main_file = p.value("mainFile", "");
      r.html_path = p.value("html", "");
      r.first_errors = p.value("firstErrors", std::vector<std::string>{});
      report.papers.push_back(std::move(r));
    }
    summarize(report);
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed corpus report: ") + e.what());
  }
}

std::string to_text(const CorpusReport& report) {
  auto percent = [](double rate) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(1);
    s << rate * 100 << "%";
    return s.str();
  };
  std::ostringstream out;
  out << "Corpus report (" << report.converter_version << ")\n";
  out << "  bundles:              " << report.total << "\n";
  for (const auto& [status, count] : report.per_status) {
    out << "  " << to_string(status) << ":" << std::string(22 - std::min<std::size_t>(21, to_string(status).size()), ' ')
        << count << "\n";
  }
  out << "  error rate:           " << percent(report.error_rate) << "\n";
  out << "  fail rate:            " << percent(report.fail_rate) << "\n";
  out << "  cost per article:     " << report.cost_per_article.format() << "\n";
  out << "  reconversion cost:    " << report.cost_estimate.format() << "\n";
  out.setf(std::ios::fixed);
  out.precision(2);
  out << "  elapsed:              " << report.elapsed_seconds << " s (jobs " << report.parallelism << ")\n";
  for (const PaperRecord& p : report.papers) {
    if (p.status != ConversionStatus::failed && p.status != ConversionStatus::errors_but_readable) continue;
    out << "  " << to_string(p.status) << " " << p.paper_id;
    if (!p.first_errors.empty()) out << ": " << p.first_errors.front();
    out << "\n";
  }
  return out.str();
}

// ------------------------------------------------------------------ batch

namespace {

PaperRecord record_for(const ConversionResult& r) {
  PaperRecord p;
  p.paper_id = r.paper_id;
  p.status = r.status;
  p.errors = count_severity(r.diagnostics, Severity::error);
  p.warnings = count_severity(r.diagnostics, Severity::warning);
  p.infos = count_severity(r.diagnostics, Severity::info);
  p.unknown_packages = r.unknown_packages;
  p.converter_version = std::string(converter_version);
  p.elapsed_ms = r.elapsed_ms;
  p.main_file = r.main_file;
  for (const Diagnostic& d : r.diagnostics) {
    if (d.severity == Severity::error && p.first_errors.size() < 3) p.first_errors.push_back(d.message);
  }
  return p;
}

}  // namespace

CorpusReport run_batch(const std::filesystem::path& corpus_dir, const PackageRegistry& registry,
                       const BatchOptions& options) {
  namespace fs = std::filesystem;
  const auto start = std::chrono::steady_clock::now();
  std::vector<fs::path> bundles;
  try {
    for (const auto& entry : fs::directory_iterator(corpus_dir)) {
      if (entry.is_directory()) bundles.push_back(entry.path());
    }
  } catch (const fs::filesystem_error& e) {
    throw CorpusUnreadable(e.what());
  }
  std::sort(bundles.begin(), bundles.end());

  std::vector<PaperRecord> records(bundles.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < bundles.size(); i = next++) {
      const fs::path& dir = bundles[i];
      ConversionResult result;
      try {
        result = convert(load_bundle(dir), registry, options.convert);
      } catch (const std::exception& e) {
        result.paper_id = dir.filename().string();
        report(result.diagnostics, Severity::error, Stage::bundle, "bundle-unreadable", e.what());
        result.status = classify(result.diagnostics, false);
      }
      PaperRecord record = record_for(result);
      if (options.write_html && result.html) {
        const fs::path out = dir / (result.paper_id + ".html");
        std::ofstream file(out, std::ios::binary);
        file << result.html->html;
        if (file) record.html_path = out.string();
      }
      records[i] = std::move(record);
    }
  };
  const int jobs = std::max(1, options.jobs);
  {
    std::vector<std::jthread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
  }

  CorpusReport report;
  report.converter_version = std::string(converter_version);
  report.cost_per_article = options.cost_per_article;
  report.parallelism = jobs;
  report.papers = std::move(records);
  std::sort(report.papers.begin(), report.papers.end(),
            [](const PaperRecord& a, const PaperRecord& b) { return a.paper_id < b.paper_id; });
  summarize(report);
  report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<std::string> plan_reconversion(const CorpusReport& previous, std::string_view current_version,
                                           const std::set<std::string>& changed_packages) {
  std::vector<std::string> out;
  for (const PaperRecord& p : previous.papers) {
    const bool stale = p.converter_version != current_version;
    const bool affected = std::any_of(p.unknown_packages.begin(), p.unknown_packages.end(),
                                      [&](const std::string& pkg) { return changed_packages.count(pkg) > 0; });
    if (stale || affected) out.push_back(p.paper_id);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace texhtml
