#include "texhtml/pipeline.hpp"

#include <fstream>
#include <new>
#include <sstream>

#include "texhtml/lexer.hpp"

namespace texhtml {

namespace {

constexpr std::pair<ConversionStatus, std::string_view> status_names[] = {
    {ConversionStatus::success, "Success"},
    {ConversionStatus::success_with_warnings, "SuccessWithWarnings"},
    {ConversionStatus::errors_but_readable, "ErrorsButReadable"},
    {ConversionStatus::failed, "Failed"},
};

}  // namespace

std::string_view to_string(ConversionStatus status) {
  for (const auto& [s, name] : status_names) {
    if (s == status) return name;
  }
  return "Failed";
}

std::optional<ConversionStatus> status_from_string(std::string_view text) {
  for (const auto& [s, name] : status_names) {
    if (name == text) return s;
  }
  return std::nullopt;
}

SourceBundle load_bundle(const std::filesystem::path& dir, std::optional<std::string> paper_id) {
  namespace fs = std::filesystem;
  SourceBundle bundle;
  bundle.paper_id = paper_id ? *paper_id : fs::absolute(dir).lexically_normal().filename().string();
  if (bundle.paper_id.empty()) bundle.paper_id = fs::absolute(dir).lexically_normal().parent_path().filename().string();
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".html") continue;  // our own output from an earlier run
    std::ifstream in(entry.path(), std::ios::binary);
    if (!in) throw fs::filesystem_error("cannot read", entry.path(), std::make_error_code(std::errc::io_error));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    bundle.files.emplace(fs::relative(entry.path(), dir).generic_string(), buffer.str());
  }
  return bundle;
}

namespace {

// An odd run of backslashes before `pos` escapes the character there.
bool escaped(std::string_view text, std::size_t pos) {
  std::size_t run = 0;
  while (run < pos && text[pos - run - 1] == '\\') ++run;
  return run % 2 == 1;
}

// True when \documentclass appears before any unescaped % on some line.
bool declares_class(std::string_view text) {
  constexpr std::string_view needle = "\\documentclass";
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string_view::npos) {
    const std::size_t line_start = text.rfind('\n', pos) == std::string_view::npos ? 0 : text.rfind('\n', pos) + 1;
    bool commented = false;
    for (std::size_t i = line_start; i < pos; ++i) {
      if (text[i] == '%' && !escaped(text, i)) {
        commented = true;
        break;
      }
    }
    const std::size_t after = pos + needle.size();
    const bool word_end = after >= text.size() || !std::isalpha(static_cast<unsigned char>(text[after]));
    if (!commented && word_end && !escaped(text, pos)) return true;
    pos = after;
  }
  return false;
}

}  // namespace

std::optional<std::string> detect_main_file(const std::map<std::string, std::string>& files, Diagnostics& diags) {
  std::vector<std::string> candidates;
  for (const auto& [path, bytes] : files) {
    if (declares_class(bytes)) candidates.push_back(path);
  }
  if (candidates.empty()) return std::nullopt;
  if (candidates.size() > 1) {
    std::string list;
    for (const auto& c : candidates) list += (list.empty() ? "" : ", ") + c;
    report(diags, Severity::warning, Stage::bundle, "multiple-main-files",
           "several files contain \\documentclass (" + list + "); using " + candidates.front());
  }
  return candidates.front();  // std::map iterates in lexicographic order
}

ConversionStatus classify(const Diagnostics& diags, bool html_present) {
  if (!html_present) return ConversionStatus::failed;
  if (has_severity(diags, Severity::error)) return ConversionStatus::errors_but_readable;
  if (has_severity(diags, Severity::warning)) return ConversionStatus::success_with_warnings;
  return ConversionStatus::success;
}

int exit_code(const ConversionResult& result) {
  if (result.bundle_invalid) return 3;
  switch (result.status) {
    case ConversionStatus::success:
    case ConversionStatus::success_with_warnings: return 0;
    case ConversionStatus::errors_but_readable: return 1;
    case ConversionStatus::failed: return 2;
  }
  return 2;
}

namespace {

class TimeoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Converter {
 public:
  Converter(const SourceBundle& bundle, const PackageRegistry& registry, const ConvertOptions& options)
      : bundle_(bundle), registry_(registry), options_(options) {}

  ConversionResult run() {
    const auto start = std::chrono::steady_clock::now();
    deadline_ = start + options_.timeout;
    result_.paper_id = bundle_.paper_id;
    try {
      stages();
    } catch (const TimeoutError& e) {
      fail("timeout", e.what());
    } catch (const TooLarge& e) {
      fail("output-too-large", e.what());
    } catch (const std::bad_alloc&) {
      fail("out-of-memory", "conversion ran out of memory");
    } catch (const std::exception& e) {
      fail("internal-error", std::string("internal error: ") + e.what());
    } catch (...) {
      fail("internal-error", "internal error");
    }
    result_.status = classify(result_.diagnostics, result_.html.has_value());
    result_.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return std::move(result_);
  }

 private:
  void fail(std::string code, std::string message, Stage stage = Stage::pipeline) {
    report(result_.diagnostics, Severity::error, stage, std::move(code), std::move(message));
    result_.html.reset();
  }

  void check_deadline(std::string_view stage) const {
    if (std::chrono::steady_clock::now() > deadline_) {
      throw TimeoutError("conversion exceeded its time budget during " + std::string(stage));
    }
  }

  void append(const Diagnostics& diags) {
    result_.diagnostics.insert(result_.diagnostics.end(), diags.begin(), diags.end());
  }

  void stages() {
    std::optional<std::string> main = bundle_.main_file;
    if (main && bundle_.files.count(*main) == 0) {
      result_.bundle_invalid = true;
      fail("main-file-missing", "main file '" + *main + "' is not in the bundle", Stage::bundle);
      return;
    }
    if (!main) main = detect_main_file(bundle_.files, result_.diagnostics);
    if (!main || !declares_class(bundle_.files.at(*main))) {
      result_.bundle_invalid = true;
      fail("no-main-file", "no file in the bundle contains \\documentclass", Stage::bundle);
      return;
    }
    result_.main_file = *main;

    LexResult lexed = tokenize(bundle_.files.at(*main));
    append(lexed.diagnostics);
    std::vector<std::string> stack{*main};
    TokenList tokens = splice_inputs(std::move(lexed.tokens), *main, stack);
    check_deadline("lexing");

    ExpansionBudget budget;
    budget.fuel = options_.fuel;
    budget.max_tokens = options_.max_tokens;
    budget.deadline = deadline_;
    ExpansionHooks hooks;
    hooks.on_package = [this](std::string_view name, MacroEnvironment& env, Diagnostics& diags) {
      if (const PackageHandler* h = registry_.resolve(name); h != nullptr && h->kind == PackageKind::implemented) {
        inject(*h, env, diags);
      }
    };
    ExpansionResult expanded = expand(tokens, registry_.base_environment(), budget, hooks);
    append(expanded.diagnostics);
    if (expanded.failure) {
      result_.html.reset();
      return;  // the expander already reported the failure as an error
    }
    check_deadline("expansion");

    Document doc = resolve_refs(parse(expanded.tokens, registry_));
    append(doc.diagnostics);
    result_.unknown_packages = doc.unknown_packages;
    check_deadline("parsing");

    EmitOptions emit_options = options_.emit;
    emit_options.paper_id = bundle_.paper_id;
    emit_options.require_content = true;
    try {
      HtmlArtifact artifact = emit(doc, emit_options);
      append(artifact.warnings);
      result_.html = std::move(artifact);
    } catch (const EmitterFailure& e) {
      fail("emitter-failure", e.what(), Stage::emitter);
    }
    check_deadline("emission");
    if (options_.keep_document) result_.document = std::move(doc);
  }

  std::optional<std::string> find_input(std::string_view name, const std::string& from) const {
    namespace fs = std::filesystem;
    const fs::path base = fs::path(from).parent_path();
    std::vector<std::string> candidates;
    for (const fs::path& dir : {base, fs::path{}}) {
      const fs::path p = (dir / std::string(name)).lexically_normal();
      candidates.push_back(p.generic_string());
      candidates.push_back(p.generic_string() + ".tex");
    }
    for (const auto& c : candidates) {
      if (bundle_.files.count(c)) return c;
    }
    return std::nullopt;
  }

  TokenList splice_inputs(TokenList tokens, const std::string& file, std::vector<std::string>& stack) {
    TokenList out;
    out.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const Token& t = tokens[i];
      if (!(t.is_cs("input") || t.is_cs("include") || t.is_cs("subfile"))) {
        out.push_back(std::move(tokens[i]));
        continue;
      }
      std::size_t j = i + 1;
      while (j < tokens.size() && tokens[j].is_space()) ++j;
      if (j >= tokens.size() || !tokens[j].is_begin_group()) {
        out.push_back(std::move(tokens[i]));
        continue;
      }
      std::size_t k = j + 1;
      std::string name;
      while (k < tokens.size() && !tokens[k].is_end_group() && !tokens[k].is_par()) name += detokenize(std::span(&tokens[k++], 1));
      if (k >= tokens.size() || !tokens[k].is_end_group()) {
        out.push_back(std::move(tokens[i]));
        continue;
      }
      while (!name.empty() && name.back() == ' ') name.pop_back();
      const auto found = find_input(name, file);
      if (!found) {
        report(result_.diagnostics, Severity::warning, Stage::bundle, "missing-input",
               "\\" + t.text + "{" + name + "}: file not in the bundle", t.location);
        out.push_back(std::move(tokens[i]));
        continue;
      }
      if (std::find(stack.begin(), stack.end(), *found) != stack.end() ||
          static_cast<int>(stack.size()) > options_.max_input_depth) {
        report(result_.diagnostics, Severity::error, Stage::bundle, "recursive-input",
               "\\" + t.text + "{" + name + "} would recurse; skipped", t.location);
        i = k;
        continue;
      }
      LexResult lexed = tokenize(bundle_.files.at(*found));
      for (Diagnostic& d : lexed.diagnostics) d.message = *found + ": " + d.message;
      append(lexed.diagnostics);
      stack.push_back(*found);
      TokenList inner = splice_inputs(std::move(lexed.tokens), *found, stack);
      stack.pop_back();
      if (t.is_cs("include")) out.push_back(Token::paragraph_break(t.location));
      for (Token& x : inner) out.push_back(std::move(x));
      if (t.is_cs("include")) out.push_back(Token::paragraph_break(t.location));
      i = k;
      if (out.size() > options_.max_tokens) throw TooLarge("input splicing exceeded the token limit");
      check_deadline("input splicing");
    }
    return out;
  }

  const SourceBundle& bundle_;
  const PackageRegistry& registry_;
  const ConvertOptions& options_;
  std::chrono::steady_clock::time_point deadline_;
  ConversionResult result_;
};

}  // namespace

ConversionResult convert(const SourceBundle& bundle, const PackageRegistry& registry, const ConvertOptions& options) {
  return Converter(bundle, registry, options).run();
}

ConversionResult convert_source(std::string_view source, std::string paper_id, const PackageRegistry& registry,
                                const ConvertOptions& options) {
  SourceBundle bundle;
  bundle.paper_id = std::move(paper_id);
  bundle.files.emplace("main.tex", std::string(source));
  return convert(bundle, registry, options);
}

}  // namespace texhtml
