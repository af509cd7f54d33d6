#pragma once

// TeX math to presentation MathML for a small grammar: identifiers, numbers,
// operators and relations, ^ and _ scripts, \frac, \sqrt, Greek letters,
// font commands, \left/\right and \text. Anything outside the grammar is
// reported so the caller can fall back to the literal source.

#include <optional>
#include <string>
#include <string_view>

namespace texhtml {

struct MathRender {
  std::optional<std::string> mathml;  // complete <math> element
  std::string unsupported;            // first construct outside the grammar
};

MathRender render_math(std::string_view tex, bool display);

/// Escapes &, <, >, " and ' for text and attribute positions.
std::string escape_html(std::string_view text);

}  // namespace texhtml
