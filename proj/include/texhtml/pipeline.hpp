#pragma once

// One source bundle through lex -> expand -> parse -> emit, classified into
// the four-way outcome taxonomy.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "texhtml/diagnostics.hpp"
#include "texhtml/document.hpp"
#include "texhtml/html_emitter.hpp"
#include "texhtml/macro_engine.hpp"
#include "texhtml/package_registry.hpp"

namespace texhtml {

inline constexpr std::string_view converter_version = "texhtml 1.0.0";

enum class ConversionStatus { success, success_with_warnings, errors_but_readable, failed };

/// "Success", "SuccessWithWarnings", "ErrorsButReadable", "Failed".
std::string_view to_string(ConversionStatus status);
std::optional<ConversionStatus> status_from_string(std::string_view text);

struct SourceBundle {
  std::string paper_id;
  std::map<std::string, std::string> files;  // relative path ('/'-separated) -> bytes
  std::optional<std::string> main_file;      // detected when absent
};

/// Reads every regular file under `dir`. The paper id defaults to the
/// directory name. Throws std::filesystem::filesystem_error on I/O failure.
SourceBundle load_bundle(const std::filesystem::path& dir, std::optional<std::string> paper_id = std::nullopt);

/// The file containing \documentclass outside a comment. Several candidates:
/// the lexicographically smallest path, plus a warning. None: nullopt.
std::optional<std::string> detect_main_file(const std::map<std::string, std::string>& files,
                                            Diagnostics& diags);

struct ConvertOptions {
  std::uint64_t fuel = default_fuel;
  std::size_t max_tokens = 4'000'000;
  std::chrono::milliseconds timeout{30'000};
  int max_input_depth = 16;
  EmitOptions emit;  // paper_id is taken from the bundle
  bool keep_document = false;
};

struct ConversionResult {
  std::string paper_id;
  ConversionStatus status = ConversionStatus::failed;
  Diagnostics diagnostics;
  std::optional<HtmlArtifact> html;  // absent exactly when status is Failed
  double elapsed_ms = 0;
  bool bundle_invalid = false;
  std::string main_file;
  std::set<std::string> unknown_packages;
  std::optional<Document> document;  // with ConvertOptions::keep_document
};

ConversionStatus classify(const Diagnostics& diags, bool html_present);

/// Never throws; every failure mode is reported through the result.
ConversionResult convert(const SourceBundle& bundle, const PackageRegistry& registry,
                         const ConvertOptions& options = {});

/// Single-file convenience wrapper (the source is stored as "main.tex").
ConversionResult convert_source(std::string_view source, std::string paper_id, const PackageRegistry& registry,
                                const ConvertOptions& options = {});

/// 0 Success/SuccessWithWarnings, 1 ErrorsButReadable, 2 Failed, 3 invalid bundle.
int exit_code(const ConversionResult& result);

}  // namespace texhtml
