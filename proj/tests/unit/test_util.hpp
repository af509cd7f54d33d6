#pragma once

#include <algorithm>
#include <string>
#include <string_view>

#include "texhtml/pipeline.hpp"

namespace testutil {

inline const texhtml::PackageRegistry& registry() {
  static const texhtml::PackageRegistry r = texhtml::PackageRegistry::with_defaults();
  return r;
}

inline texhtml::ConversionResult run(std::string_view source, std::string id = "test") {
  texhtml::ConvertOptions options;
  options.keep_document = true;
  return texhtml::convert_source(source, std::move(id), registry(), options);
}

inline texhtml::ConversionResult run_body(std::string_view body, std::string_view preamble = "") {
  return run("\\documentclass{article}\n" + std::string(preamble) + "\\begin{document}\n" + std::string(body) +
             "\n\\end{document}\n");
}

inline bool has_code(const texhtml::Diagnostics& diags, std::string_view code) {
  return std::any_of(diags.begin(), diags.end(), [&](const texhtml::Diagnostic& d) { return d.code == code; });
}

inline std::size_t count_code(const texhtml::Diagnostics& diags, std::string_view code) {
  return static_cast<std::size_t>(
      std::count_if(diags.begin(), diags.end(), [&](const texhtml::Diagnostic& d) { return d.code == code; }));
}

}  // namespace testutil
