#pragma once

// Seeded document and bundle generators shared by the unit and
// acceptance tests.

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "texhtml/pipeline.hpp"

namespace gen {

using Rng = std::mt19937_64;

/// Letters-only control-sequence name, distinct for every index.
std::string unbound_name(std::size_t index);

struct FuzzDoc {
  std::string source;
  std::string command_text;            // e.g. "\xqbab{arg}", appears verbatim in body text
  std::set<std::string> unknown_packages;  // packages the generator knows are unsupported
};

/// Random document mixing supported constructs, a few packages (some
/// unsupported) and one unique unbound command in body text.
FuzzDoc fuzz_document(Rng& rng, std::size_t index);

struct StructuredDoc {
  std::string source;
  std::vector<int> levels;  // sectioning commands in source order (section = 1)
};

/// Well-formed document whose sectioning never skips a level.
StructuredDoc structured_document(Rng& rng);

/// Arbitrary bytes, TeX-flavoured token soup or mutated documents, in 1-3 files.
texhtml::SourceBundle random_bundle(Rng& rng, std::size_t index);

enum class Intended { clean, warnings, errors, failed };

struct FixtureBundle {
  std::string paper_id;
  Intended intended;
  std::string note;  // which defect the bundle carries
  std::map<std::string, std::string> files;
};

/// 53 clean, 22 warning-only, 22 with errors, 3 that cannot produce a page.
std::vector<FixtureBundle> fixture_corpus(std::uint64_t seed);

void write_bundles(const std::filesystem::path& root, const std::vector<FixtureBundle>& bundles);

std::string_view to_string(Intended intended);

}  // namespace gen
