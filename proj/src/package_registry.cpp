#include "texhtml/package_registry.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "default_packages.hpp"

namespace texhtml {

std::string_view to_string(PackageKind kind) {
  return kind == PackageKind::implemented ? "implemented" : "ignored-safe";
}

namespace {

struct RoleName {
  EnvironmentRole role;
  std::string_view name;
};

constexpr RoleName role_names[] = {
    {EnvironmentRole::document, "document"},
    {EnvironmentRole::itemize, "itemize"},
    {EnvironmentRole::enumerate, "enumerate"},
    {EnvironmentRole::description, "description"},
    {EnvironmentRole::bibliography, "bibliography"},
    {EnvironmentRole::figure, "figure"},
    {EnvironmentRole::table, "table"},
    {EnvironmentRole::tabular, "tabular"},
    {EnvironmentRole::verbatim, "verbatim"},
    {EnvironmentRole::quote, "quote"},
    {EnvironmentRole::abstract, "abstract"},
    {EnvironmentRole::transparent, "transparent"},
    {EnvironmentRole::math_numbered, "math-numbered"},
    {EnvironmentRole::math_unnumbered, "math-unnumbered"},
    {EnvironmentRole::math_inline, "math-inline"},
};

}  // namespace

std::string_view to_string(EnvironmentRole role) {
  for (const auto& entry : role_names) {
    if (entry.role == role) return entry.name;
  }
  return "transparent";
}

std::optional<EnvironmentRole> environment_role_from_string(std::string_view text) {
  for (const auto& entry : role_names) {
    if (entry.name == text) return entry.role;
  }
  return std::nullopt;
}

const MacroDef* PackageHandler::find_macro(std::string_view command) const {
  const auto it = std::find_if(macros.begin(), macros.end(),
                               [command](const MacroDef& m) { return m.name == command; });
  return it == macros.end() ? nullptr : &*it;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Splits off the next whitespace-delimited word.
std::string_view next_word(std::string_view& rest) {
  rest = trim(rest);
  const auto end = rest.find_first_of(" \t");
  const std::string_view word = rest.substr(0, end);
  rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);
  return word;
}

// Accepts "name" or "\name".
std::string command_name(std::string_view word) {
  if (word == "<space>") return " ";
  if (word.size() > 1 && word.front() == '\\') word.remove_prefix(1);
  return std::string(word);
}

std::string command_word(std::string_view name) {
  if (name == " ") return "<space>";
  return std::string(name);
}

class HandlerParser {
 public:
  HandlerParser(std::string_view text, std::string_view origin) : text_(text), origin_(origin) {}

  PackageHandler run() {
    std::istringstream in{std::string(text_)};
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_;
      std::string_view line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      std::string_view rest = line;
      const std::string_view keyword = next_word(rest);
      if (keyword == "package") {
        handler_.name = std::string(next_word(rest));
        if (handler_.name.empty()) fail("package name missing");
      } else if (keyword == "kind") {
        const auto kind = next_word(rest);
        if (kind == "implemented") {
          handler_.kind = PackageKind::implemented;
        } else if (kind == "ignored-safe") {
          handler_.kind = PackageKind::ignored_safe;
        } else {
          fail("unknown kind '" + std::string(kind) + "'");
        }
      } else if (keyword == "structural" || keyword == "math" || keyword == "ignored") {
        preserved_macro(keyword, rest);
      } else if (keyword == "expandable") {
        expandable_macro(rest);
      } else if (keyword == "environment") {
        environment(rest);
      } else {
        fail("unknown directive '" + std::string(keyword) + "'");
      }
    }
    if (handler_.name.empty()) fail("missing 'package' line");
    return std::move(handler_);
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw HandlerFormatError(std::string(origin_) + ":" + std::to_string(line_) + ": " + message);
  }

  int arity(std::string_view word) const {
    if (word.size() != 1 || word[0] < '0' || word[0] > '9') {
      fail("arity must be a single digit, got '" + std::string(word) + "'");
    }
    return word[0] - '0';
  }

  void add_macro(MacroDef def) {
    if (handler_.find_macro(def.name) != nullptr) fail("duplicate command '" + def.name + "'");
    handler_.macros.push_back(std::move(def));
  }

  void preserved_macro(std::string_view keyword, std::string_view rest) {
    MacroDef def;
    def.name = command_name(next_word(rest));
    if (def.name.empty()) fail("command name missing");
    def.arity = arity(next_word(rest));
    def.kind = keyword == "ignored" ? MacroKind::ignored : MacroKind::structural;
    const auto flag = next_word(rest);
    if (flag == "optional") {
      def.optional_argument = TokenList{};
    } else if (!flag.empty()) {
      fail("unexpected '" + std::string(flag) + "'");
    }
    if (keyword == "math") handler_.redefinable.insert(def.name);
    add_macro(std::move(def));
  }

  void expandable_macro(std::string_view rest) {
    MacroDef def;
    def.kind = MacroKind::expandable;
    def.name = command_name(next_word(rest));
    if (def.name.empty()) fail("command name missing");
    def.arity = arity(next_word(rest));
    rest = trim(rest);
    if (!rest.empty() && rest.front() == '[') {
      const auto close = rest.find(']');
      if (close == std::string_view::npos) fail("unterminated [default]");
      def.optional_argument = tokenize(rest.substr(1, close - 1)).tokens;
      rest = trim(rest.substr(close + 1));
    }
    if (rest.empty() || rest.front() != '=') fail("expected '= <body>'");
    def.body = tokenize(trim(rest.substr(1))).tokens;
    for (const Token& t : def.body) {
      if (t.kind == TokenKind::parameter && t.param_index > def.arity) {
        fail("parameter #" + std::to_string(t.param_index) + " exceeds arity");
      }
    }
    add_macro(std::move(def));
  }

  void environment(std::string_view rest) {
    EnvironmentHint hint;
    hint.name = std::string(next_word(rest));
    const auto role_word = next_word(rest);
    const auto role = environment_role_from_string(role_word);
    if (hint.name.empty() || !role) fail("bad environment line");
    hint.role = *role;
    const auto arity_word = next_word(rest);
    if (!arity_word.empty()) hint.arity = arity(arity_word);
    const auto flag = next_word(rest);
    if (flag == "optional") {
      hint.optional = true;
    } else if (!flag.empty()) {
      fail("unexpected '" + std::string(flag) + "'");
    }
    handler_.environments.push_back(std::move(hint));
  }

  std::string_view text_;
  std::string_view origin_;
  std::size_t line_ = 0;
  PackageHandler handler_;
};

PackageHandler parse_builtin(std::string_view text) { return parse_handler(text, "<builtin>"); }

}  // namespace

PackageHandler parse_handler(std::string_view text, std::string_view origin) {
  return HandlerParser(text, origin).run();
}

PackageHandler load_handler_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HandlerFormatError(path.string() + ": cannot open");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_handler(buffer.str(), path.string());
}

std::string serialize_handler(const PackageHandler& handler) {
  std::ostringstream out;
  out << "package " << handler.name << "\n";
  out << "kind " << to_string(handler.kind) << "\n";
  for (const MacroDef& m : handler.macros) {
    if (m.kind == MacroKind::expandable) {
      out << "expandable " << command_word(m.name) << ' ' << m.arity;
      if (m.optional_argument) out << " [" << detokenize(*m.optional_argument) << ']';
      out << " = " << detokenize(m.body) << "\n";
      continue;
    }
    const bool math = handler.redefinable.count(m.name) > 0;
    out << (m.kind == MacroKind::ignored ? "ignored" : math ? "math" : "structural") << ' '
        << command_word(m.name) << ' ' << m.arity;
    if (m.optional_argument) out << " optional";
    out << "\n";
  }
  for (const EnvironmentHint& e : handler.environments) {
    out << "environment " << e.name << ' ' << to_string(e.role);
    if (e.arity > 0 || e.optional) out << ' ' << e.arity;
    if (e.optional) out << " optional";
    out << "\n";
  }
  return out.str();
}

void inject(const PackageHandler& handler, MacroEnvironment& env, Diagnostics& diags) {
  for (const MacroDef& m : handler.macros) {
    if (env.is_protected(m.name)) continue;
    env.define(m, diags, DefineMode::def);
    if (m.kind != MacroKind::expandable && handler.redefinable.count(m.name) == 0) env.protect(m.name);
  }
}

PackageRegistry::PackageRegistry() : core_(parse_builtin(detail::core_handler_source().front())) {}

PackageRegistry PackageRegistry::with_defaults() {
  PackageRegistry registry;
  for (std::string_view source : detail::default_handler_sources()) registry.add(parse_builtin(source));
  for (std::string_view name : detail::default_ignored_packages()) {
    PackageHandler handler;
    handler.name = std::string(name);
    handler.kind = PackageKind::ignored_safe;
    registry.add(std::move(handler));
  }
  return registry;
}

void PackageRegistry::add(PackageHandler handler, Diagnostics* diags, bool strict) {
  const auto it = handlers_.find(handler.name);
  if (it != handlers_.end()) {
    if (strict && diags != nullptr) {
      report(*diags, Severity::warning, Stage::pipeline, "handler-replaced",
             "package handler '" + handler.name + "' registered twice; replaced");
    }
    it->second = std::move(handler);
    return;
  }
  std::string key = handler.name;
  handlers_.emplace(std::move(key), std::move(handler));
}

std::size_t PackageRegistry::load_directory(const std::filesystem::path& dir, Diagnostics* diags,
                                            bool strict) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pkg") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::size_t loaded = 0;
  for (const auto& file : files) {
    try {
      add(load_handler_file(file), diags, strict);
      ++loaded;
    } catch (const HandlerFormatError& e) {
      if (diags == nullptr) throw;
      report(*diags, Severity::warning, Stage::pipeline, "handler-invalid", e.what());
    }
  }
  return loaded;
}

const PackageHandler* PackageRegistry::resolve(std::string_view name) const {
  const auto it = handlers_.find(name);
  return it == handlers_.end() ? nullptr : &it->second;
}

RegistryOutcome PackageRegistry::resolve_all(std::span<const std::string> names) const {
  RegistryOutcome outcome;
  for (const std::string& name : names) {
    outcome.requested.push_back(name);
    const PackageHandler* handler = resolve(name);
    if (handler == nullptr) {
      outcome.unknown.insert(name);
    } else if (handler->kind == PackageKind::implemented) {
      outcome.implemented.insert(name);
    } else {
      outcome.ignored.insert(name);
    }
  }
  return outcome;
}

std::vector<std::string> PackageRegistry::package_names() const {
  std::vector<std::string> names;
  names.reserve(handlers_.size());
  for (const auto& [name, handler] : handlers_) names.push_back(name);
  return names;
}

MacroEnvironment PackageRegistry::base_environment() const {
  MacroEnvironment env;
  Diagnostics ignored;
  inject(core_, env, ignored);
  return env;
}

}  // namespace texhtml
