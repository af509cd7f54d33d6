#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace texhtml {

enum class Severity { info, warning, error };

/// Pipeline stage that produced a diagnostic.
enum class Stage { bundle, lexer, expander, parser, emitter, pipeline };

std::string_view to_string(Severity severity);
std::string_view to_string(Stage stage);

struct SourceLocation {
  std::size_t line = 1;
  std::size_t column = 1;

  friend bool operator==(const SourceLocation&, const SourceLocation&) = default;
  friend auto operator<=>(const SourceLocation&, const SourceLocation&) = default;
};

struct Diagnostic {
  Severity severity = Severity::info;
  Stage stage = Stage::pipeline;
  std::string code;     // stable machine-readable identifier, e.g. "unknown-command"
  std::string message;
  SourceLocation location;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

using Diagnostics = std::vector<Diagnostic>;

// Appends a diagnostic; small helper so call sites stay on one line.
inline void report(Diagnostics& diags, Severity severity, Stage stage, std::string code,
                   std::string message, SourceLocation loc = {}) {
  diags.push_back(Diagnostic{severity, stage, std::move(code), std::move(message), loc});
}

bool has_severity(const Diagnostics& diags, Severity severity);
std::size_t count_severity(const Diagnostics& diags, Severity severity);

}  // namespace texhtml
