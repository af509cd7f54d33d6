#include "texhtml/issue_intake.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>

#include <httplib.h>
#include <openssl/evp.h>

#include "texhtml/utf8.hpp"

namespace texhtml {

namespace {

bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' || cp == 0x85 ||
         cp == 0xA0 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 || cp == 0x202F ||
         cp == 0x205F || cp == 0x3000;
}

std::string trimmed(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::int64_t system_now() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

std::string normalize_snippet(std::string_view snippet) {
  std::string out;
  bool pending_space = false;
  for (std::size_t pos = 0; pos < snippet.size();) {
    const auto d = utf8::decode(snippet, pos);
    pos += d.length;
    if (is_space(d.code_point)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    utf8::append(out, utf8::fold_case(d.code_point));
  }
  return out;
}

std::string dedup_key(std::string_view paper_id, const std::optional<std::string>& snippet) {
  if (!snippet) return {};
  const std::string normalized = normalize_snippet(*snippet);
  if (normalized.empty()) return {};
  std::string material(paper_id);
  material += '\x1f';
  material += normalized;
  return sha256_hex(material);
}

nlohmann::ordered_json to_json(const IssueReport& r) {
  nlohmann::ordered_json j;
  j["reportId"] = r.report_id;
  j["paperId"] = r.paper_id;
  if (r.snippet) j["snippet"] = *r.snippet;
  j["description"] = r.description;
  j["createdAt"] = r.created_at;
  j["dedupKey"] = r.dedup_key;
  if (r.duplicate_of) j["duplicateOf"] = *r.duplicate_of;
  return j;
}

IssueReport issue_from_json(const nlohmann::json& j) {
  IssueReport r;
  r.report_id = j.at("reportId").get<std::string>();
  r.paper_id = j.at("paperId").get<std::string>();
  if (j.contains("snippet")) r.snippet = j.at("snippet").get<std::string>();
  r.description = j.at("description").get<std::string>();
  r.created_at = j.at("createdAt").get<std::int64_t>();
  r.dedup_key = j.value("dedupKey", "");
  if (j.contains("duplicateOf")) r.duplicate_of = j.at("duplicateOf").get<std::string>();
  return r;
}

// ------------------------------------------------------------------ store

IssueStore::IssueStore() : clock_(system_now) {}

IssueStore::IssueStore(std::filesystem::path path, Clock clock)
    : path_(std::move(path)), clock_(clock ? std::move(clock) : Clock(system_now)) {
  load();
}

void IssueStore::load() {
  std::ifstream in(*path_, std::ios::binary);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      IssueReport r = issue_from_json(nlohmann::json::parse(line));
      if (!r.dedup_key.empty() && !r.duplicate_of) primary_by_key_.emplace(r.dedup_key, r.report_id);
      reports_.push_back(std::move(r));
    } catch (const nlohmann::json::exception&) {
      ++skipped_lines_;  // typically a torn final write
    }
  }
  next_sequence_ = reports_.size() + skipped_lines_ + 1;
  for (const IssueReport& r : reports_) {
    if (r.report_id.size() > 1 && r.report_id[0] == 'r') {
      try {
        next_sequence_ = std::max<std::uint64_t>(next_sequence_, std::stoull(r.report_id.substr(1)) + 1);
      } catch (const std::exception&) {
      }
    }
  }
}

void IssueStore::append_line(const IssueReport& report) {
  if (!path_) return;
  std::ofstream out(*path_, std::ios::binary | std::ios::app);
  out << to_json(report).dump() << '\n';
  out.flush();
  if (!out) throw std::runtime_error("cannot append to " + path_->string());
}

SubmitResult IssueStore::submit(std::string_view paper_id, std::optional<std::string> snippet,
                                std::string_view description) {
  const std::string id = trimmed(utf8::sanitize(paper_id));
  if (id.empty()) throw ValidationError("paperId must not be empty");
  if (trimmed(description).empty()) throw ValidationError("description must not be empty");
  if (snippet) snippet = utf8::sanitize(*snippet);
  if (snippet && normalize_snippet(*snippet).empty()) snippet.reset();

  IssueReport r;
  r.paper_id = id;
  r.snippet = std::move(snippet);
  r.description = utf8::sanitize(description);
  r.dedup_key = dedup_key(r.paper_id, r.snippet);

  std::unique_lock lock(mutex_);
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "r%06llu", static_cast<unsigned long long>(next_sequence_++));
  r.report_id = buffer;
  r.created_at = clock_();
  if (!r.dedup_key.empty()) {
    if (const auto it = primary_by_key_.find(r.dedup_key); it != primary_by_key_.end()) r.duplicate_of = it->second;
  }
  append_line(r);
  if (!r.dedup_key.empty() && !r.duplicate_of) primary_by_key_.emplace(r.dedup_key, r.report_id);
  reports_.push_back(r);
  return SubmitResult{r.report_id, r.duplicate_of};
}

std::vector<IssueReport> IssueStore::list(std::string_view paper_id) const {
  std::shared_lock lock(mutex_);
  std::vector<IssueReport> out;
  for (const IssueReport& r : reports_) {
    if (r.paper_id == paper_id && !r.duplicate_of) out.push_back(r);
  }
  lock.unlock();
  // Newest first; ids are sequential, so they break timestamp ties.
  std::stable_sort(out.begin(), out.end(), [](const IssueReport& a, const IssueReport& b) {
    if (a.created_at != b.created_at) return a.created_at > b.created_at;
    return a.report_id > b.report_id;
  });
  return out;
}

std::vector<IssueReport> IssueStore::all() const {
  std::shared_lock lock(mutex_);
  return reports_;
}

std::size_t IssueStore::size() const {
  std::shared_lock lock(mutex_);
  return reports_.size();
}

// ----------------------------------------------------------------- server

struct IntakeServer::Impl {
  IssueStore& store;
  httplib::Server server;

  explicit Impl(IssueStore& s) : store(s) {
    server.set_payload_max_length(1 << 20);
    server.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok"})", "application/json");
    });
    server.Post("/reports", [this](const httplib::Request& req, httplib::Response& res) { post(req, res); });
    server.Get(R"(/reports/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
      nlohmann::ordered_json out = nlohmann::ordered_json::array();
      for (const IssueReport& r : store.list(req.matches[1].str())) {
        nlohmann::ordered_json j;
        j["reportId"] = r.report_id;
        j["paperId"] = r.paper_id;
        if (r.snippet) j["snippet"] = *r.snippet;
        j["description"] = r.description;
        j["createdAt"] = r.created_at;
        out.push_back(std::move(j));
      }
      res.set_content(out.dump(), "application/json");
    });
  }

  static void error(httplib::Response& res, int status, const std::string& message) {
    res.status = status;
    res.set_content(nlohmann::json{{"error", message}}.dump(), "application/json");
  }

  void post(const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      return error(res, 400, "request body is not valid JSON");
    }
    if (!body.is_object()) return error(res, 400, "request body must be a JSON object");
    auto text_field = [&](const char* name) -> std::optional<std::string> {
      if (!body.contains(name) || body[name].is_null()) return std::nullopt;
      if (!body[name].is_string()) throw ValidationError(std::string(name) + " must be a string");
      return body[name].get<std::string>();
    };
    try {
      const auto paper = text_field("paperId");
      const auto description = text_field("description");
      const auto snippet = text_field("snippet");
      const SubmitResult result = store.submit(paper.value_or(""), snippet, description.value_or(""));
      nlohmann::ordered_json out;
      out["reportId"] = result.report_id;
      if (result.duplicate_of) out["duplicateOf"] = *result.duplicate_of;
      res.status = 201;
      res.set_content(out.dump(), "application/json");
    } catch (const ValidationError& e) {
      error(res, 400, e.what());
    } catch (const std::exception& e) {
      error(res, 500, e.what());
    }
  }
};

IntakeServer::IntakeServer(IssueStore& store) : impl_(std::make_unique<Impl>(store)) {}
IntakeServer::~IntakeServer() = default;

int IntakeServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool IntakeServer::listen() { return impl_->server.listen_after_bind(); }

void IntakeServer::stop() { impl_->server.stop(); }

}  // namespace texhtml
