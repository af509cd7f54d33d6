#pragma once

// Batch conversion of a directory of bundles, the aggregate report, the
// reconversion cost model and reconversion planning.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "texhtml/pipeline.hpp"

namespace texhtml {

/// US dollars as a whole number of micro-dollars, so sums and products are exact.
class Money {
 public:
  constexpr Money() = default;
  static constexpr Money from_micros(std::int64_t micros) { return Money(micros); }

  /// Accepts "30000", "0.015", "$1,250.50"; at most six decimal places.
  static std::optional<Money> parse(std::string_view text);

  constexpr std::int64_t micros() const { return micros_; }

  /// "$30,000.00", "$0.015": two decimals minimum, trailing zeros trimmed beyond that.
  std::string format() const;
  /// "30000.00", "0.015": like format() without the sign and separators.
  std::string decimal() const;

  friend Money operator+(Money a, Money b);
  friend constexpr auto operator<=>(Money, Money) = default;

 private:
  constexpr explicit Money(std::int64_t micros) : micros_(micros) {}
  std::int64_t micros_ = 0;
};

/// articles x per-article cost. Throws std::overflow_error past int64 range.
Money estimate_cost(std::uint64_t articles, Money per_article);

struct PaperRecord {
  std::string paper_id;
  ConversionStatus status = ConversionStatus::failed;
  std::size_t errors = 0;
  std::size_t warnings = 0;
  std::size_t infos = 0;
  std::set<std::string> unknown_packages;
  std::string converter_version;
  double elapsed_ms = 0;
  std::string main_file;
  std::string html_path;  // empty when no page was produced
  std::vector<std::string> first_errors;  // up to three error messages
};

struct CorpusReport {
  std::size_t total = 0;
  std::map<ConversionStatus, std::size_t> per_status;
  double error_rate = 0;  // (ErrorsButReadable + Failed) / total
  double fail_rate = 0;   // Failed / total
  Money cost_per_article;
  Money cost_estimate;
  double elapsed_seconds = 0;
  std::string converter_version;
  int parallelism = 1;
  std::vector<PaperRecord> papers;  // sorted by paper id
};

/// Rebuilds totals, rates and cost from `papers`.
void summarize(CorpusReport& report);

nlohmann::ordered_json to_json(const CorpusReport& report);
/// Throws std::invalid_argument on a malformed report.
CorpusReport report_from_json(const nlohmann::json& j);
std::string to_text(const CorpusReport& report);

class CorpusUnreadable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BatchOptions {
  int jobs = 1;
  Money cost_per_article = Money::from_micros(15'000);
  bool write_html = true;
  ConvertOptions convert;
};

/// Converts every immediate subdirectory of `corpus_dir`. A bundle's page is
/// written beside its sources as <paper-id>.html.
CorpusReport run_batch(const std::filesystem::path& corpus_dir, const PackageRegistry& registry,
                       const BatchOptions& options = {});

/// Papers converted by another converter version, plus papers whose unknown
/// packages intersect `changed_packages`; sorted by paper id.
std::vector<std::string> plan_reconversion(const CorpusReport& previous, std::string_view current_version,
                                           const std::set<std::string>& changed_packages);

}  // namespace texhtml
