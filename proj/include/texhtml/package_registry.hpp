#pragma once

// Package handlers: data bundles that teach the converter a LaTeX package
// without interpreting its .sty file.
//
// Handler file format (one package per file, '#' starts a comment line):
//
//   package <name>
//   kind implemented | ignored-safe
//   structural <command> <arity> [optional]     preserved; protected from redefinition
//   math       <command> <arity> [optional]     preserved; users may redefine
//   ignored    <command> <arity> [optional]     dropped together with its arguments
//   expandable <command> <arity> [[<default>]] = <TeX body>
//   environment <name> <role> [<arity> [optional]]
//
// <command> may be written with or without its backslash.
// Roles: document, itemize, enumerate, description, bibliography, figure,
// table, tabular, verbatim, quote, abstract, transparent, math-numbered,
// math-unnumbered, math-inline.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "texhtml/diagnostics.hpp"
#include "texhtml/macro_engine.hpp"

namespace texhtml {

enum class PackageKind { implemented, ignored_safe };

enum class EnvironmentRole {
  document,
  itemize,
  enumerate,
  description,
  bibliography,
  figure,
  table,
  tabular,
  verbatim,
  quote,
  abstract,
  transparent,
  math_numbered,
  math_unnumbered,
  math_inline,
};

std::string_view to_string(PackageKind kind);
std::string_view to_string(EnvironmentRole role);
std::optional<EnvironmentRole> environment_role_from_string(std::string_view text);

struct EnvironmentHint {
  std::string name;
  EnvironmentRole role = EnvironmentRole::transparent;
  int arity = 0;        // mandatory arguments after \begin{name}
  bool optional = false; // a leading [..] argument is accepted
};

struct PackageHandler {
  std::string name;
  PackageKind kind = PackageKind::implemented;
  std::vector<MacroDef> macros;
  std::set<std::string> redefinable;  // structural-kind names users may override (math vocabulary)
  std::vector<EnvironmentHint> environments;

  const MacroDef* find_macro(std::string_view command) const;
};

class HandlerFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses one handler file. Throws HandlerFormatError with "origin:line: ..." messages.
PackageHandler parse_handler(std::string_view text, std::string_view origin = "<handler>");
PackageHandler load_handler_file(const std::filesystem::path& path);
std::string serialize_handler(const PackageHandler& handler);

/// Adds every handler macro to `env`; structural names not listed as
/// redefinable become protected.
void inject(const PackageHandler& handler, MacroEnvironment& env, Diagnostics& diags);

struct RegistryOutcome {
  std::vector<std::string> requested;
  std::set<std::string> implemented;
  std::set<std::string> ignored;
  std::set<std::string> unknown;
};

class PackageRegistry {
 public:
  /// Only the LaTeX core vocabulary; no packages.
  PackageRegistry();

  /// Core plus the shipped handlers (graphicx, amsmath, amssymb, ... and the
  /// layout-only ignore list).
  static PackageRegistry with_defaults();

  /// Replaces an existing handler of the same name; in strict mode that
  /// replacement is reported through `diags`.
  void add(PackageHandler handler, Diagnostics* diags = nullptr, bool strict = false);

  /// Loads every "*.pkg" file in `dir` (sorted by file name) and returns how
  /// many were added. With `diags`, malformed files are reported and
  /// skipped; without, the HandlerFormatError propagates.
  std::size_t load_directory(const std::filesystem::path& dir, Diagnostics* diags = nullptr,
                             bool strict = false);

  /// nullptr means Unknown.
  const PackageHandler* resolve(std::string_view name) const;

  RegistryOutcome resolve_all(std::span<const std::string> names) const;

  const PackageHandler& core() const { return core_; }
  std::vector<std::string> package_names() const;

  /// Macro environment holding the core vocabulary.
  MacroEnvironment base_environment() const;

 private:
  PackageHandler core_;
  std::map<std::string, PackageHandler, std::less<>> handlers_;
};

}  // namespace texhtml
