#pragma once

// Minimal reference tokenizer used as a test oracle. It is written from
// the default LaTeX category rules alone and shares no code with the
// production lexer. Raw arguments (\verb, verbatim, \url) are not modelled,
// so oracle inputs must avoid them.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "texhtml/lexer.hpp"

namespace oracle {

struct RefToken {
  enum Kind { cs, chr, param, par } kind = chr;
  std::string text;      // name for cs, UTF-8 value for chr
  std::string category;  // chr only
  int index = 0;         // param only
};

std::vector<RefToken> reference_tokenize(std::string_view source);

/// Canonical one-token-per-line rendering shared by both sides of a comparison.
std::string serialize(const std::vector<RefToken>& tokens);
std::vector<RefToken> from_tokens(std::span<const texhtml::Token> tokens);

}  // namespace oracle
