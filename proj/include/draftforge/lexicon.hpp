#pragma once

// draftforge/lexicon.hpp — Plain-text lexicon assets (one entry per line,
// '#' comments and blank lines ignored) and the asset directory layout.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace draftforge {

std::vector<std::string> parse_lexicon(std::string_view text);

// Throws Error(IoFailure) if the file cannot be read.
std::string read_text_file(const std::filesystem::path& path);
std::vector<std::string> load_lexicon(const std::filesystem::path& path);

// Tab-separated homophone-like pairs, applied in both directions. Entries are
// single tokens so substitutions never change token counts.
class ConfusionLexicon {
 public:
  ConfusionLexicon() = default;
  static ConfusionLexicon parse(std::string_view text);

  // Candidates for a lowercase token; empty if the token has no entry.
  const std::vector<std::string>& candidates(const std::string& lowered) const;
  const std::vector<std::string>& all_words() const noexcept { return all_words_; }
  bool empty() const noexcept { return all_words_.empty(); }

 private:
  std::map<std::string, std::vector<std::string>> by_word_;
  std::vector<std::string> all_words_;
};

struct LexiconSet {
  ConfusionLexicon confusions;
  std::vector<std::string> fillers;
  std::vector<std::string> interjections;
  std::vector<std::string> commands;
  std::vector<std::string> conclusory;
};

// Reads lexicons/{confusions.tsv,fillers.txt,interjections.txt,commands.txt,
// conclusory.txt} under asset_dir.
LexiconSet load_lexicons(const std::filesystem::path& asset_dir);

// Byte offsets of case-insensitive occurrences of phrase in text that start
// and end on word boundaries (ASCII alphanumerics). Non-overlapping, left to right.
std::vector<std::size_t> find_phrase(std::string_view text, std::string_view phrase);
bool contains_phrase(std::string_view text, std::string_view phrase);

// DRAFTFORGE_ASSETS if set, otherwise the source-tree assets directory.
std::filesystem::path default_asset_dir();

}  // namespace draftforge
