#pragma once

// Fuel-bounded macro expansion.
//
// Expandable macros are substituted and their output re-scanned. Structural
// and ignored macros, and anything not bound in the environment, pass through
// untouched so the document parser still sees the author's structure.

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "texhtml/diagnostics.hpp"
#include "texhtml/lexer.hpp"

namespace texhtml {

enum class MacroKind { expandable, structural, ignored };

std::string_view to_string(MacroKind kind);

struct MacroDef {
  std::string name;
  int arity = 0;
  TokenList body;
  MacroKind kind = MacroKind::expandable;
  // Expandable: default for an optional first parameter (\newcommand[n][default]).
  // Structural/ignored: presence means the command accepts a leading [..] argument.
  std::optional<TokenList> optional_argument;
};

/// \newenvironment lowered to a begin/end body pair.
struct EnvironmentDef {
  std::string name;
  int arity = 0;
  std::optional<TokenList> optional_argument;
  TokenList begin_body;
  TokenList end_body;
};

enum class DefineMode { new_command, renew_command, provide_command, def };

class MacroEnvironment {
 public:
  /// Adds or replaces a binding. Returns false (with a diagnostic) when the
  /// definition is rejected: bad arity, a parameter index above the arity,
  /// or an attempt to redefine a protected command.
  bool define(MacroDef def, Diagnostics& diags, DefineMode mode = DefineMode::def,
              SourceLocation loc = {});

  bool define_environment(EnvironmentDef def, Diagnostics& diags, DefineMode mode = DefineMode::def,
                          SourceLocation loc = {});

  const MacroDef* find(std::string_view name) const;
  const EnvironmentDef* find_environment(std::string_view name) const;

  void erase(std::string_view name);

  /// Protected names keep their binding; user redefinitions are refused.
  void protect(std::string name) { protected_.insert(std::move(name)); }
  bool is_protected(std::string_view name) const { return protected_.find(name) != protected_.end(); }

  std::size_t size() const { return macros_.size(); }
  const std::map<std::string, MacroDef, std::less<>>& macros() const { return macros_; }

 private:
  std::map<std::string, MacroDef, std::less<>> macros_;
  std::map<std::string, EnvironmentDef, std::less<>> environments_;
  std::set<std::string, std::less<>> protected_;
};

/// Builds a macro definition from source text, e.g. make_macro("vec", 1, "\\mathbf{#1}").
MacroDef make_macro(std::string name, int arity, std::string_view body,
                    MacroKind kind = MacroKind::expandable);

inline constexpr std::uint64_t default_fuel = 100'000;

struct ExpansionBudget {
  std::uint64_t fuel = default_fuel;
  // Pending + emitted tokens; catches exponential argument growth that a
  // step counter alone would allow.
  std::size_t max_tokens = 4'000'000;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

enum class ExpansionFailure { fuel_exhausted, output_too_large, deadline_exceeded };

std::string_view to_string(ExpansionFailure failure);

struct ExpansionHooks {
  /// Called for each package named by \usepackage / \RequirePackage so the
  /// caller can inject package macros before the rest of the stream expands.
  std::function<void(std::string_view package, MacroEnvironment& env, Diagnostics& diags)> on_package;
};

struct ExpansionResult {
  TokenList tokens;
  Diagnostics diagnostics;
  std::optional<ExpansionFailure> failure;
  std::uint64_t substitutions = 0;
};

ExpansionResult expand(std::span<const Token> tokens, MacroEnvironment env,
                       const ExpansionBudget& budget = {}, const ExpansionHooks& hooks = {});

}  // namespace texhtml
