#include "texhtml/diagnostics.hpp"

#include <algorithm>

namespace texhtml {

std::string_view to_string(Severity severity) {
  switch (severity) {
    case Severity::info: return "info";
    case Severity::warning: return "warning";
    case Severity::error: return "error";
  }
  return "info";
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::bundle: return "bundle";
    case Stage::lexer: return "lexer";
    case Stage::expander: return "expander";
    case Stage::parser: return "parser";
    case Stage::emitter: return "emitter";
    case Stage::pipeline: return "pipeline";
  }
  return "pipeline";
}

bool has_severity(const Diagnostics& diags, Severity severity) {
  return std::any_of(diags.begin(), diags.end(),
                     [severity](const Diagnostic& d) { return d.severity == severity; });
}

std::size_t count_severity(const Diagnostics& diags, Severity severity) {
  return static_cast<std::size_t>(std::count_if(
      diags.begin(), diags.end(), [severity](const Diagnostic& d) { return d.severity == severity; }));
}

}  // namespace texhtml
