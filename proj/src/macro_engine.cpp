#include "texhtml/macro_engine.hpp"

#include <algorithm>
#include <unordered_set>

namespace texhtml {

std::string_view to_string(MacroKind kind) {
  switch (kind) {
    case MacroKind::expandable: return "expandable";
    case MacroKind::structural: return "structural";
    case MacroKind::ignored: return "ignored";
  }
  return "expandable";
}

std::string_view to_string(ExpansionFailure failure) {
  switch (failure) {
    case ExpansionFailure::fuel_exhausted: return "fuel-exhausted";
    case ExpansionFailure::output_too_large: return "output-too-large";
    case ExpansionFailure::deadline_exceeded: return "timeout";
  }
  return "fuel-exhausted";
}

namespace {

int max_param_index(const TokenList& body) {
  int max_index = 0;
  for (const Token& t : body) {
    if (t.kind == TokenKind::parameter) max_index = std::max(max_index, t.param_index);
  }
  return max_index;
}

bool validate_params(std::string_view name, int arity, const TokenList& body, Diagnostics& diags,
                     SourceLocation loc) {
  if (arity < 0 || arity > 9) {
    report(diags, Severity::error, Stage::expander, "bad-arity",
           "\\" + std::string(name) + ": arity " + std::to_string(arity) + " outside 0-9", loc);
    return false;
  }
  if (max_param_index(body) > arity) {
    report(diags, Severity::error, Stage::expander, "bad-parameter",
           "\\" + std::string(name) + ": parameter #" + std::to_string(max_param_index(body)) +
               " exceeds arity " + std::to_string(arity),
           loc);
    return false;
  }
  return true;
}

}  // namespace

bool MacroEnvironment::define(MacroDef def, Diagnostics& diags, DefineMode mode, SourceLocation loc) {
  if (def.name.empty()) {
    report(diags, Severity::error, Stage::expander, "bad-definition", "macro name is empty", loc);
    return false;
  }
  if (!validate_params(def.name, def.arity, def.body, diags, loc)) return false;

  if (is_protected(def.name)) {
    report(diags, Severity::warning, Stage::expander, "structural-redefinition",
           "redefinition of structural command \\" + def.name + " ignored", loc);
    return false;
  }
  const auto existing = macros_.find(def.name);
  if (existing != macros_.end()) {
    if (mode == DefineMode::provide_command) return true;
    if (mode == DefineMode::new_command) {
      report(diags, Severity::warning, Stage::expander, "already-defined",
             "\\newcommand: \\" + def.name + " already defined; new definition kept", loc);
    }
  } else if (mode == DefineMode::renew_command) {
    report(diags, Severity::info, Stage::expander, "renew-undefined",
           "\\renewcommand: \\" + def.name + " was not defined", loc);
  }
  std::string key = def.name;
  macros_.insert_or_assign(std::move(key), std::move(def));
  return true;
}

bool MacroEnvironment::define_environment(EnvironmentDef def, Diagnostics& diags, DefineMode mode,
                                          SourceLocation loc) {
  if (def.name.empty()) {
    report(diags, Severity::error, Stage::expander, "bad-definition", "environment name is empty", loc);
    return false;
  }
  if (!validate_params(def.name, def.arity, def.begin_body, diags, loc)) return false;
  if (max_param_index(def.end_body) > 0) {
    report(diags, Severity::error, Stage::expander, "bad-parameter",
           "environment " + def.name + ": parameters are not allowed in the end code", loc);
    return false;
  }
  const bool exists = environments_.count(def.name) > 0;
  if (exists && mode == DefineMode::new_command) {
    report(diags, Severity::warning, Stage::expander, "already-defined",
           "\\newenvironment: " + def.name + " already defined; new definition kept", loc);
  }
  std::string key = def.name;
  environments_.insert_or_assign(std::move(key), std::move(def));
  return true;
}

const MacroDef* MacroEnvironment::find(std::string_view name) const {
  const auto it = macros_.find(name);
  return it == macros_.end() ? nullptr : &it->second;
}

const EnvironmentDef* MacroEnvironment::find_environment(std::string_view name) const {
  const auto it = environments_.find(name);
  return it == environments_.end() ? nullptr : &it->second;
}

void MacroEnvironment::erase(std::string_view name) {
  const auto it = macros_.find(name);
  if (it != macros_.end()) macros_.erase(it);
}

MacroDef make_macro(std::string name, int arity, std::string_view body, MacroKind kind) {
  MacroDef def;
  def.name = std::move(name);
  def.arity = arity;
  def.kind = kind;
  def.body = tokenize(body).tokens;
  return def;
}

namespace {

bool is_definition_command(std::string_view name) {
  return name == "newcommand" || name == "renewcommand" || name == "providecommand" ||
         name == "DeclareRobustCommand" || name == "def" || name == "gdef" || name == "edef" ||
         name == "xdef" || name == "let" || name == "newenvironment" || name == "renewenvironment";
}

class Expander {
 public:
  Expander(MacroEnvironment env, const ExpansionBudget& budget, const ExpansionHooks& hooks)
      : env_(std::move(env)), budget_(budget), hooks_(hooks), fuel_(budget.fuel) {}

  ExpansionResult run(std::span<const Token> input) {
    pending_.assign(input.rbegin(), input.rend());
    token_limit_ = budget_.max_tokens + input.size();
    std::size_t iterations = 0;
    while (!pending_.empty() && !result_.failure) {
      if (budget_.deadline && (++iterations & 0xFFF) == 0 &&
          std::chrono::steady_clock::now() > *budget_.deadline) {
        fail(ExpansionFailure::deadline_exceeded, "expansion exceeded the time budget", {});
        break;
      }
      Token t = pop();
      if (!t.is_cs()) {
        result_.tokens.push_back(std::move(t));
        continue;
      }
      handle_control_sequence(std::move(t));
    }
    return std::move(result_);
  }

 private:
  // --- pending stack (back() is the next token) ---

  Token pop() {
    Token t = std::move(pending_.back());
    pending_.pop_back();
    return t;
  }

  void skip_spaces() {
    while (!pending_.empty() && pending_.back().is_space()) pending_.pop_back();
  }

  // Index (into pending_) of the end-group matching the begin-group at `open`,
  // or npos when the group runs off the end of input.
  std::size_t matching_close(std::size_t open) const {
    int depth = 0;
    for (std::size_t i = open + 1; i-- > 0;) {
      if (pending_[i].is_begin_group()) {
        ++depth;
      } else if (pending_[i].is_end_group() && --depth == 0) {
        return i;
      }
    }
    return std::string::npos;
  }

  // Removes pending_[from..] down to (excluding) `to`, returning the tokens
  // strictly between in reading order. `from` is the opening delimiter.
  TokenList take_between(std::size_t from, std::size_t to) {
    TokenList out;
    for (std::size_t i = from; i-- > to + 1;) out.push_back(std::move(pending_[i]));
    pending_.resize(to);
    return out;
  }

  /// Undelimited argument: a braced group (braces stripped) or one token.
  std::optional<TokenList> take_argument() {
    skip_spaces();
    if (pending_.empty() || pending_.back().is_end_group()) return std::nullopt;
    if (pending_.back().is_begin_group()) {
      const std::size_t open = pending_.size() - 1;
      const std::size_t close = matching_close(open);
      if (close == std::string::npos) return std::nullopt;
      return take_between(open, close);
    }
    return TokenList{pop()};
  }

  std::optional<TokenList> take_optional() {
    skip_spaces();
    if (pending_.empty() || !pending_.back().is_char(CatCode::other, "[")) return std::nullopt;
    const std::size_t open = pending_.size() - 1;
    int depth = 0;
    for (std::size_t i = open; i-- > 0;) {
      const Token& t = pending_[i];
      if (t.is_begin_group()) {
        ++depth;
      } else if (t.is_end_group()) {
        if (--depth < 0) return std::nullopt;
      } else if (depth == 0 && t.is_char(CatCode::other, "]")) {
        return take_between(open, i);
      }
    }
    return std::nullopt;
  }

  /// Peeks "{name}" made only of character tokens. Returns the name and the
  /// pending_ size to resize to when consuming it.
  std::optional<std::pair<std::string, std::size_t>> peek_group_text() const {
    std::size_t i = pending_.size();
    while (i > 0 && pending_[i - 1].is_space()) --i;
    if (i == 0 || !pending_[i - 1].is_begin_group()) return std::nullopt;
    std::string name;
    for (--i; i > 0; --i) {
      const Token& t = pending_[i - 1];
      if (t.is_end_group()) return std::make_pair(name, i - 1);
      if (!t.is_char() || t.is_begin_group()) return std::nullopt;
      name += t.text;
    }
    return std::nullopt;
  }

  void push_expansion(TokenList tokens) {
    pending_.insert(pending_.end(), std::make_move_iterator(tokens.rbegin()),
                    std::make_move_iterator(tokens.rend()));
    if (pending_.size() + result_.tokens.size() > token_limit_) {
      fail(ExpansionFailure::output_too_large, "expansion produced more than " +
                                                   std::to_string(budget_.max_tokens) + " tokens",
           {});
    }
  }

  // --- diagnostics ---

  void fail(ExpansionFailure failure, std::string message, SourceLocation loc) {
    result_.failure = failure;
    report(result_.diagnostics, Severity::error, Stage::expander, std::string(to_string(failure)),
           std::move(message), loc);
  }

  void diag(Severity severity, std::string code, std::string message, SourceLocation loc) {
    report(result_.diagnostics, severity, Stage::expander, std::move(code), std::move(message), loc);
  }

  bool consume_fuel(const Token& at) {
    if (fuel_ == 0) {
      fail(ExpansionFailure::fuel_exhausted,
           "macro expansion exceeded " + std::to_string(budget_.fuel) + " substitutions near \\" + at.text,
           at.location);
      return false;
    }
    --fuel_;
    ++result_.substitutions;
    return true;
  }

  // --- main dispatch ---

  void handle_control_sequence(Token cs) {
    const std::string& name = cs.text;
    if (is_definition_command(name)) {
      definition(cs);
      return;
    }
    if (name == "usepackage" || name == "RequirePackage") {
      use_package(std::move(cs));
      return;
    }
    if ((name == "begin" || name == "end") && user_environment(cs)) return;

    const MacroDef* def = env_.find(name);
    if (def == nullptr) {
      if (unknown_seen_.insert(name).second) {
        const bool delimited = delimited_defs_.count(name) > 0;
        diag(Severity::info, "unknown-command",
             "unknown command \\" + name + (delimited ? " (delimited \\def not supported)" : "") +
                 " passed through",
             cs.location);
      }
      result_.tokens.push_back(std::move(cs));
      return;
    }
    if (def->kind != MacroKind::expandable) {
      result_.tokens.push_back(std::move(cs));
      return;
    }
    substitute(*def, std::move(cs));
  }

  std::optional<std::vector<TokenList>> grab_arguments(int arity, const std::optional<TokenList>& optional) {
    std::vector<TokenList> args;
    int remaining = arity;
    if (optional && arity > 0) {
      auto opt = take_optional();
      args.push_back(opt ? std::move(*opt) : *optional);
      --remaining;
    }
    for (; remaining > 0; --remaining) {
      auto arg = take_argument();
      if (!arg) return std::nullopt;
      args.push_back(std::move(*arg));
    }
    return args;
  }

  static TokenList instantiate(const TokenList& body, const std::vector<TokenList>& args,
                               SourceLocation loc) {
    TokenList out;
    out.reserve(body.size());
    for (std::size_t i = 0; i < body.size(); ++i) {
      const Token& t = body[i];
      // "##1" in a body becomes "#1" in the output, ready for a nested \def.
      if (t.is_char(CatCode::parameter) && i + 1 < body.size() && body[i + 1].is_char(CatCode::other) &&
          body[i + 1].text.size() == 1 && body[i + 1].text[0] >= '1' && body[i + 1].text[0] <= '9') {
        out.push_back(Token::parameter(body[i + 1].text[0] - '0', loc));
        ++i;
        continue;
      }
      if (t.kind == TokenKind::parameter) {
        const auto idx = static_cast<std::size_t>(t.param_index - 1);
        if (idx < args.size()) out.insert(out.end(), args[idx].begin(), args[idx].end());
        continue;
      }
      Token copy = t;
      copy.location = loc;
      out.push_back(std::move(copy));
    }
    return out;
  }

  void substitute(const MacroDef& def, Token cs) {
    // Copy what we need: a definition inside the expansion may rebind the name.
    const TokenList body = def.body;
    auto args = grab_arguments(def.arity, def.optional_argument);
    if (!args) {
      diag(Severity::error, "missing-argument",
           "\\" + cs.text + " expects " + std::to_string(def.arity) + " argument(s)", cs.location);
      result_.tokens.push_back(std::move(cs));
      return;
    }
    if (!consume_fuel(cs)) return;
    push_expansion(instantiate(body, *args, cs.location));
  }

  bool user_environment(const Token& cs) {
    const auto peeked = peek_group_text();
    if (!peeked) return false;
    const EnvironmentDef* def = env_.find_environment(peeked->first);
    if (def == nullptr) return false;
    const EnvironmentDef copy = *def;
    pending_.resize(peeked->second);
    if (cs.text == "end") {
      if (consume_fuel(cs)) push_expansion(instantiate(copy.end_body, {}, cs.location));
      return true;
    }
    auto args = grab_arguments(copy.arity, copy.optional_argument);
    if (!args) {
      diag(Severity::error, "missing-argument",
           "environment " + copy.name + " expects " + std::to_string(copy.arity) + " argument(s)",
           cs.location);
      return true;
    }
    if (consume_fuel(cs)) push_expansion(instantiate(copy.begin_body, *args, cs.location));
    return true;
  }

  void use_package(Token cs) {
    const SourceLocation loc = cs.location;
    auto options = take_optional();
    auto names = take_argument();
    result_.tokens.push_back(std::move(cs));
    if (options) {
      result_.tokens.push_back(Token::character("[", CatCode::other, loc));
      result_.tokens.insert(result_.tokens.end(), options->begin(), options->end());
      result_.tokens.push_back(Token::character("]", CatCode::other, loc));
    }
    if (!names) return;
    result_.tokens.push_back(Token::character("{", CatCode::begin_group, loc));
    result_.tokens.insert(result_.tokens.end(), names->begin(), names->end());
    result_.tokens.push_back(Token::character("}", CatCode::end_group, loc));
    if (!hooks_.on_package) return;
    std::string current;
    auto flush = [&] {
      if (!current.empty()) hooks_.on_package(current, env_, result_.diagnostics);
      current.clear();
    };
    for (const Token& t : *names) {
      if (t.is_char(CatCode::other, ",")) {
        flush();
      } else if (t.is_char() && !t.is_space()) {
        current += t.text;
      }
    }
    flush();
  }

  // --- definitions ---

  std::optional<std::string> definition_name() {
    skip_spaces();
    if (pending_.empty()) return std::nullopt;
    if (pending_.back().is_cs()) return pop().text;
    if (!pending_.back().is_begin_group()) return std::nullopt;
    std::size_t i = pending_.size() - 1;
    while (i > 0 && pending_[i - 1].is_space()) --i;
    if (i == 0 || !pending_[i - 1].is_cs()) return std::nullopt;
    std::string name = pending_[i - 1].text;
    --i;
    while (i > 0 && pending_[i - 1].is_space()) --i;
    if (i == 0 || !pending_[i - 1].is_end_group()) return std::nullopt;
    pending_.resize(i - 1);
    return name;
  }

  std::optional<int> arity_argument(const Token& cs) {
    auto opt = take_optional();
    if (!opt) return 0;
    std::string digits;
    for (const Token& t : *opt) {
      if (!t.is_space()) digits += t.text;
    }
    if (digits.size() == 1 && digits[0] >= '0' && digits[0] <= '9') return digits[0] - '0';
    diag(Severity::error, "bad-arity", "\\" + cs.text + ": invalid argument count [" + digits + "]",
         cs.location);
    return std::nullopt;
  }

  void malformed(const Token& cs) {
    diag(Severity::warning, "malformed-definition", "could not parse \\" + cs.text + " definition",
         cs.location);
  }

  void definition(const Token& cs) {
    const std::string& kind = cs.text;
    if (kind == "def" || kind == "gdef" || kind == "edef" || kind == "xdef") {
      tex_def(cs);
    } else if (kind == "let") {
      tex_let(cs);
    } else if (kind == "newenvironment" || kind == "renewenvironment") {
      new_environment(cs);
    } else {
      new_command(cs);
    }
  }

  static DefineMode mode_for(std::string_view command) {
    if (command == "renewcommand" || command == "renewenvironment") return DefineMode::renew_command;
    if (command == "providecommand") return DefineMode::provide_command;
    if (command == "newcommand" || command == "newenvironment" || command == "DeclareRobustCommand") {
      return DefineMode::new_command;
    }
    return DefineMode::def;
  }

  void skip_star() {
    if (!pending_.empty() && pending_.back().is_char(CatCode::other, "*")) pending_.pop_back();
  }

  void new_command(const Token& cs) {
    skip_star();
    auto name = definition_name();
    if (!name) return malformed(cs);
    auto arity = arity_argument(cs);
    std::optional<TokenList> default_arg;
    if (arity && *arity > 0) default_arg = take_optional();
    auto body = take_argument();
    if (!body || !arity) return malformed(cs);
    MacroDef def{*name, *arity, std::move(*body), MacroKind::expandable, std::move(default_arg)};
    env_.define(std::move(def), result_.diagnostics, mode_for(cs.text), cs.location);
  }

  void tex_def(const Token& cs) {
    skip_spaces();
    if (pending_.empty() || !pending_.back().is_cs()) return malformed(cs);
    const std::string name = pop().text;
    int arity = 0;
    bool delimited = false;
    while (!pending_.empty() && !pending_.back().is_begin_group()) {
      const Token t = pop();
      if (t.kind == TokenKind::parameter && t.param_index == arity + 1) {
        ++arity;
      } else {
        delimited = true;
      }
    }
    auto body = take_argument();
    if (!body) return malformed(cs);
    if (delimited) {
      diag(Severity::warning, "delimited-def-unsupported",
           "\\def\\" + name + " uses delimited parameters; calls pass through unexpanded", cs.location);
      if (!env_.is_protected(name)) {
        delimited_defs_.insert(name);
        env_.erase(name);
      }
      return;
    }
    if (cs.text == "edef" || cs.text == "xdef") {
      diag(Severity::info, "edef-as-def", "\\" + cs.text + " treated as \\def", cs.location);
    }
    MacroDef def{name, arity, std::move(*body), MacroKind::expandable, std::nullopt};
    env_.define(std::move(def), result_.diagnostics, DefineMode::def, cs.location);
  }

  void tex_let(const Token& cs) {
    skip_spaces();
    if (pending_.empty() || !pending_.back().is_cs()) return malformed(cs);
    const std::string name = pop().text;
    skip_spaces();
    if (!pending_.empty() && pending_.back().is_char(CatCode::other, "=")) {
      pending_.pop_back();
      if (!pending_.empty() && pending_.back().is_space()) pending_.pop_back();
    }
    if (pending_.empty()) return malformed(cs);
    const Token target = pop();
    if (target.is_cs()) {
      const MacroDef* existing = env_.find(target.text);
      if (existing != nullptr && existing->kind == MacroKind::expandable) {
        MacroDef copy = *existing;
        copy.name = name;
        env_.define(std::move(copy), result_.diagnostics, DefineMode::def, cs.location);
        return;
      }
    }
    MacroDef def{name, 0, TokenList{target}, MacroKind::expandable, std::nullopt};
    env_.define(std::move(def), result_.diagnostics, DefineMode::def, cs.location);
  }

  void new_environment(const Token& cs) {
    skip_star();
    auto name = peek_group_text();
    if (!name) return malformed(cs);
    pending_.resize(name->second);
    auto arity = arity_argument(cs);
    std::optional<TokenList> default_arg;
    if (arity && *arity > 0) default_arg = take_optional();
    auto begin_body = take_argument();
    auto end_body = begin_body ? take_argument() : std::nullopt;
    if (!arity || !begin_body || !end_body) return malformed(cs);
    EnvironmentDef def{name->first, *arity, std::move(default_arg), std::move(*begin_body),
                       std::move(*end_body)};
    env_.define_environment(std::move(def), result_.diagnostics, mode_for(cs.text), cs.location);
  }

  MacroEnvironment env_;
  const ExpansionBudget& budget_;
  const ExpansionHooks& hooks_;
  std::uint64_t fuel_;
  std::size_t token_limit_ = 0;
  TokenList pending_;
  ExpansionResult result_;
  std::unordered_set<std::string> unknown_seen_;
  std::unordered_set<std::string> delimited_defs_;
};

}  // namespace

ExpansionResult expand(std::span<const Token> tokens, MacroEnvironment env, const ExpansionBudget& budget,
                       const ExpansionHooks& hooks) {
  return Expander(std::move(env), budget, hooks).run(tokens);
}

}  // namespace texhtml
