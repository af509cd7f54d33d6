#pragma once

// Document tree to a single self-contained HTML page.
//
// Mapping: title -> h1, section level n -> h(n+1) inside <section>,
// paragraph -> p, lists -> ul/ol/dl, figure -> figure + figcaption,
// verbatim -> pre, math -> MathML or a marked TeX fallback, unknown
// commands -> visible source in a span.unknown-command.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "texhtml/diagnostics.hpp"
#include "texhtml/document.hpp"

namespace texhtml {

inline constexpr std::string_view banner_text =
    "This paper uses LaTeX packages the converter does not support. Some content may be missing or "
    "shown as source.";

inline constexpr std::string_view experimental_label = "Experimental HTML";

struct EmitOptions {
  std::string paper_id = "paper";
  std::string language = "en";
  std::optional<std::string> chrome_script;    // URL of the reader script; omitted when absent
  std::optional<std::string> report_endpoint;  // issue-intake base URL for the report button
  /// Raise EmitterFailure when the document has no title, abstract or body.
  bool require_content = false;
};

struct Asset {
  std::string path;
  std::string role;  // "figure" or "inline-image"
};

struct HtmlArtifact {
  std::string html;
  Diagnostics warnings;
  bool includes_banner = false;
  std::vector<Asset> assets;
};

class EmitterFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

HtmlArtifact emit(const Document& doc, const EmitOptions& options = {});

/// The embedded stylesheet (one dark-scheme media rule, no fixed width).
std::string_view stylesheet();

/// Fragment-safe id for a label key; distinct keys give distinct ids.
std::string anchor_id(std::string_view prefix, std::string_view key);

}  // namespace texhtml
