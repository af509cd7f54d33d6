#pragma once

// Reader issue reports: validation, snippet-based deduplication, an
// append-only NDJSON store and the HTTP front end.
//
// HTTP:
//   POST /reports           {"paperId", "snippet"?, "description"}
//                           -> 201 {"reportId", "duplicateOf"?}, 400 {"error"}
//   GET  /reports/<paperId> -> 200 [{"reportId", "paperId", "snippet"?, "description", "createdAt"}]
//   OPTIONS *               -> 204 (CORS preflight)

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace texhtml {

struct IssueReport {
  std::string report_id;
  std::string paper_id;
  std::optional<std::string> snippet;
  std::string description;
  std::int64_t created_at = 0;  // milliseconds since the Unix epoch
  std::string dedup_key;        // empty when there is no snippet
  std::optional<std::string> duplicate_of;

  friend bool operator==(const IssueReport&, const IssueReport&) = default;
};

struct SubmitResult {
  std::string report_id;
  std::optional<std::string> duplicate_of;
};

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Trim, collapse internal whitespace runs to one space, case-fold.
std::string normalize_snippet(std::string_view snippet);

/// Hex SHA-256 of paper id and normalized snippet; empty without a snippet.
std::string dedup_key(std::string_view paper_id, const std::optional<std::string>& snippet);

nlohmann::ordered_json to_json(const IssueReport& report);
IssueReport issue_from_json(const nlohmann::json& j);

class IssueStore {
 public:
  using Clock = std::function<std::int64_t()>;

  /// In-memory only.
  IssueStore();
  /// Loads `path` if it exists, then appends every new report to it.
  explicit IssueStore(std::filesystem::path path, Clock clock = {});

  SubmitResult submit(std::string_view paper_id, std::optional<std::string> snippet, std::string_view description);

  /// Non-duplicate reports for the paper, newest first.
  std::vector<IssueReport> list(std::string_view paper_id) const;
  std::vector<IssueReport> all() const;
  std::size_t size() const;
  /// Lines of the store file that could not be read at startup.
  std::size_t skipped_lines() const { return skipped_lines_; }

  void set_clock(Clock clock) { clock_ = std::move(clock); }

 private:
  void load();
  void append_line(const IssueReport& report);

  std::optional<std::filesystem::path> path_;
  Clock clock_;
  mutable std::shared_mutex mutex_;
  std::vector<IssueReport> reports_;
  std::map<std::string, std::string> primary_by_key_;  // dedup key -> earliest report id
  std::uint64_t next_sequence_ = 1;
  std::size_t skipped_lines_ = 0;
};

class IntakeServer {
 public:
  explicit IntakeServer(IssueStore& store);
  ~IntakeServer();
  IntakeServer(const IntakeServer&) = delete;
  IntakeServer& operator=(const IntakeServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace texhtml
