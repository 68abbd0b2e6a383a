#include "draftforge/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "draftforge/error.hpp"
#include "draftforge/transcript.hpp"

#ifndef DRAFTFORGE_ASSET_DIR
#define DRAFTFORGE_ASSET_DIR "assets"
#endif

namespace draftforge {

std::vector<std::string> parse_lexicon(std::string_view text) {
  std::vector<std::string> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto entry = trim(line);
    if (entry.empty() || entry.front() == '#') continue;
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoFailure, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> load_lexicon(const std::filesystem::path& path) {
  return parse_lexicon(read_text_file(path));
}

ConfusionLexicon ConfusionLexicon::parse(std::string_view text) {
  ConfusionLexicon lex;
  for (const auto& entry : parse_lexicon(text)) {
    const auto tab = entry.find('\t');
    if (tab == std::string::npos) fail(ErrorKind::InvalidValue, "confusion entry without tab: " + entry);
    const auto a = to_lower_ascii(trim(entry.substr(0, tab)));
    const auto b = to_lower_ascii(trim(entry.substr(tab + 1)));
    if (a.empty() || b.empty() || a == b || a.find(' ') != std::string::npos || b.find(' ') != std::string::npos)
      fail(ErrorKind::InvalidValue, "confusion entry must pair two distinct single tokens: " + entry);
    for (const auto& [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
      auto& list = lex.by_word_[from];
      if (std::find(list.begin(), list.end(), to) == list.end()) list.push_back(to);
    }
    for (const auto& w : {a, b}) {
      if (std::find(lex.all_words_.begin(), lex.all_words_.end(), w) == lex.all_words_.end())
        lex.all_words_.push_back(w);
    }
  }
  return lex;
}

const std::vector<std::string>& ConfusionLexicon::candidates(const std::string& lowered) const {
  static const std::vector<std::string> none;
  const auto it = by_word_.find(lowered);
  return it == by_word_.end() ? none : it->second;
}

LexiconSet load_lexicons(const std::filesystem::path& asset_dir) {
  const auto dir = asset_dir / "lexicons";
  LexiconSet set;
  set.confusions = ConfusionLexicon::parse(read_text_file(dir / "confusions.tsv"));
  set.fillers = load_lexicon(dir / "fillers.txt");
  set.interjections = load_lexicon(dir / "interjections.txt");
  set.commands = load_lexicon(dir / "commands.txt");
  set.conclusory = load_lexicon(dir / "conclusory.txt");
  for (const auto& f : set.fillers) {
    if (f.find(' ') != std::string::npos) fail(ErrorKind::InvalidValue, "filler must be a single token: " + f);
  }
  return set;
}

std::vector<std::size_t> find_phrase(std::string_view text, std::string_view phrase) {
  std::vector<std::size_t> hits;
  if (phrase.empty() || phrase.size() > text.size()) return hits;
  const auto lower_text = to_lower_ascii(text);
  const auto lower_phrase = to_lower_ascii(phrase);
  const auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  std::size_t pos = 0;
  while ((pos = lower_text.find(lower_phrase, pos)) != std::string::npos) {
    const std::size_t end = pos + lower_phrase.size();
    const bool left_ok = pos == 0 || !is_word(lower_text[pos - 1]) || !is_word(lower_phrase.front());
    const bool right_ok = end == lower_text.size() || !is_word(lower_text[end]) || !is_word(lower_phrase.back());
    if (left_ok && right_ok) {
      hits.push_back(pos);
      pos = end;
    } else {
      ++pos;
    }
  }
  return hits;
}

bool contains_phrase(std::string_view text, std::string_view phrase) { return !find_phrase(text, phrase).empty(); }

std::filesystem::path default_asset_dir() {
  if (const char* env = std::getenv("DRAFTFORGE_ASSETS"); env != nullptr && *env != '\0') return env;
  return DRAFTFORGE_ASSET_DIR;
}

}  // namespace draftforge
