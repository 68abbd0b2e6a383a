#include "draftforge/noise.hpp"

#include <algorithm>
#include <cctype>

#include "draftforge/codec.hpp"
#include "draftforge/error.hpp"
#include "draftforge/prng.hpp"

namespace draftforge {

namespace {

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

bool is_terminal_punct(char c) { return c == '.' || c == ',' || c == '?' || c == '!'; }

void reindex(Transcript& t) {
  for (std::size_t i = 0; i < t.utterances.size(); ++i) t.utterances[i].index = i;
}

class WordChannel {
 public:
  WordChannel(const LexiconSet& lex, Prng& rng) : lex_(lex), rng_(rng) {}

  // Replaces the core of the token (before trailing punctuation), keeping
  // capitalization of the first letter.
  std::string substitute(const std::string& token) {
    std::size_t core_len = token.size();
    while (core_len > 0 && is_terminal_punct(token[core_len - 1])) --core_len;
    const std::string core = token.substr(0, core_len);
    const std::string suffix = token.substr(core_len);
    const std::string lowered = to_lower_ascii(core);
    const auto& known = lex_.confusions.candidates(lowered);
    std::string rep;
    if (!known.empty()) {
      rep = known[rng_.index(known.size())];
    } else {
      const auto& all = lex_.confusions.all_words();
      std::size_t pick = rng_.index(all.size());
      for (std::size_t tries = 0; tries < all.size() && all[pick] == lowered; ++tries)
        pick = (pick + 1) % all.size();
      rep = all[pick];
    }
    if (!core.empty() && std::isupper(static_cast<unsigned char>(core[0])))
      rep[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(rep[0])));
    return rep + suffix;
  }

  std::string filler() { return lex_.fillers[rng_.index(lex_.fillers.size())]; }

 private:
  const LexiconSet& lex_;
  Prng& rng_;
};

void apply_word_edit(Transcript& t, const WordEdit& e) {
  if (e.utterance_index >= t.size()) fail(ErrorKind::IndexOutOfRange, "word edit utterance out of range");
  auto& u = t.utterances[e.utterance_index];
  auto tokens = noise_tokens(u.text);
  switch (e.kind) {
    case WordEditKind::Substitute:
      if (e.token_index >= tokens.size() || tokens[e.token_index] != e.original || e.replacement.empty())
        fail(ErrorKind::IndexOutOfRange, "substitution does not match utterance tokens");
      tokens[e.token_index] = e.replacement;
      break;
    case WordEditKind::Delete:
      if (e.token_index >= tokens.size() || tokens[e.token_index] != e.original)
        fail(ErrorKind::IndexOutOfRange, "deletion does not match utterance tokens");
      tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(e.token_index));
      break;
    case WordEditKind::Insert:
      if (e.token_index > tokens.size() || e.replacement.empty())
        fail(ErrorKind::IndexOutOfRange, "insertion position out of range");
      tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(e.token_index), e.replacement);
      break;
  }
  if (tokens.empty()) fail(ErrorKind::IndexOutOfRange, "edit empties utterance");
  u.text = join_tokens(tokens);
}

void apply_swap(Transcript& t, const SpeakerSwap& s) {
  if (s.index_a >= t.size() || s.index_b >= t.size()) fail(ErrorKind::IndexOutOfRange, "swap index out of range");
  auto& a = t.utterances[s.index_a];
  auto& b = t.utterances[s.index_b];
  std::swap(a.speaker_id, b.speaker_id);
  std::swap(a.role, b.role);
}

void apply_interjection(Transcript& t, const InterjectionInsert& ins) {
  if (ins.position > t.size() || ins.text.empty())
    fail(ErrorKind::IndexOutOfRange, "interjection position out of range");
  Utterance u;
  u.speaker_id = std::string(kInterjectionSpeaker);
  u.role = SpeakerRole::Unknown;
  u.text = ins.text;
  t.utterances.insert(t.utterances.begin() + static_cast<std::ptrdiff_t>(ins.position), std::move(u));
  reindex(t);
}

std::string_view kind_name(WordEditKind k) {
  switch (k) {
    case WordEditKind::Substitute: return "substitute";
    case WordEditKind::Delete: return "delete";
    case WordEditKind::Insert: return "insert";
  }
  return "substitute";
}

WordEditKind kind_from(const std::string& s) {
  if (s == "substitute") return WordEditKind::Substitute;
  if (s == "delete") return WordEditKind::Delete;
  if (s == "insert") return WordEditKind::Insert;
  fail(ErrorKind::InvalidValue, "unknown word edit kind " + s);
}

}  // namespace

void NoiseSpec::validate() const {
  for (double r : {word_corruption_rate, speaker_swap_rate, interjection_rate}) {
    if (!(r >= 0.0 && r <= 1.0)) fail(ErrorKind::InvalidValue, "noise rate outside [0,1]");
  }
}

std::vector<std::string> noise_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::string noisy_transcript_id(const Transcript& clean) { return clean.transcript_id + "/noisy"; }

NoiseEngine::NoiseEngine(LexiconSet lexicons) : lexicons_(std::move(lexicons)) {
  if (lexicons_.confusions.empty() || lexicons_.fillers.empty() || lexicons_.interjections.empty())
    fail(ErrorKind::InvalidValue, "noise lexicons must be non-empty");
}

NoisyCleanPair NoiseEngine::corrupt(const Transcript& clean, const NoiseSpec& spec, std::string pair_id) const {
  if (clean.empty()) fail(ErrorKind::EmptyTranscript, "cannot corrupt an empty transcript");
  spec.validate();
  for (const auto& u : clean.utterances) {
    if (u.role == SpeakerRole::Unknown) fail(ErrorKind::InvalidValue, "clean transcript contains an Unknown role");
  }

  Prng rng(spec.seed);
  WordChannel words(lexicons_, rng);
  NoisyCleanPair pair;
  pair.pair_id = pair_id.empty() ? clean.transcript_id : std::move(pair_id);
  pair.clean = clean;
  pair.spec = spec;
  Transcript noisy = clean;
  noisy.transcript_id = noisy_transcript_id(clean);
  auto& edits = pair.annotation.edits;

  for (auto& u : noisy.utterances) {
    const auto tokens = noise_tokens(u.text);
    std::vector<std::string> out;
    bool edited = false;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      const auto& tok = tokens[k];
      if (!rng.bernoulli(spec.word_corruption_rate)) {
        out.push_back(tok);
        continue;
      }
      edited = true;
      auto kind = static_cast<WordEditKind>(rng.index(3));
      const bool last_token_left = out.empty() && k + 1 == tokens.size();
      if (kind == WordEditKind::Delete && last_token_left) kind = WordEditKind::Substitute;
      WordEdit e{u.index, out.size(), kind, {}, {}};
      switch (kind) {
        case WordEditKind::Substitute:
          e.original = tok;
          e.replacement = words.substitute(tok);
          out.push_back(e.replacement);
          break;
        case WordEditKind::Delete:
          e.original = tok;
          break;
        case WordEditKind::Insert:
          out.push_back(tok);
          e.token_index = out.size();
          e.replacement = words.filler();
          out.push_back(e.replacement);
          break;
      }
      edits.emplace_back(std::move(e));
    }
    if (edited) u.text = join_tokens(out);
  }

  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    if (rng.bernoulli(spec.speaker_swap_rate)) selected.push_back(i);
  }
  for (std::size_t k = 0; k + 1 < selected.size(); k += 2) {
    const SpeakerSwap s{selected[k], selected[k + 1]};
    apply_swap(noisy, s);
    edits.emplace_back(s);
  }

  std::vector<Utterance> merged;
  merged.reserve(noisy.size() * 2);
  for (auto& u : noisy.utterances) {
    merged.push_back(std::move(u));
    if (rng.bernoulli(spec.interjection_rate)) {
      const auto& text = lexicons_.interjections[rng.index(lexicons_.interjections.size())];
      Utterance bg;
      bg.speaker_id = std::string(kInterjectionSpeaker);
      bg.role = SpeakerRole::Unknown;
      bg.text = text;
      merged.push_back(std::move(bg));
      edits.emplace_back(InterjectionInsert{merged.size() - 1, text});
    }
  }
  noisy.utterances = std::move(merged);
  reindex(noisy);
  pair.noisy = std::move(noisy);
  return pair;
}

Transcript replay(const Transcript& clean, const NoiseAnnotation& annotation) {
  Transcript t = clean;
  t.transcript_id = noisy_transcript_id(clean);
  for (const auto& edit : annotation.edits) {
    std::visit(
        [&](const auto& e) {
          using E = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<E, WordEdit>) apply_word_edit(t, e);
          else if constexpr (std::is_same_v<E, SpeakerSwap>) apply_swap(t, e);
          else apply_interjection(t, e);
        },
        edit);
  }
  return t;
}

Transcript aligned_originals(const NoisyCleanPair& pair) {
  Transcript t = pair.noisy;
  const auto& edits = pair.annotation.edits;
  for (auto it = edits.rbegin(); it != edits.rend(); ++it) {
    if (const auto* ins = std::get_if<InterjectionInsert>(&*it)) {
      if (ins->position >= t.size()) fail(ErrorKind::IndexOutOfRange, "interjection position out of range");
      t.utterances.erase(t.utterances.begin() + static_cast<std::ptrdiff_t>(ins->position));
    }
  }
  reindex(t);
  return t;
}

NoiseReport measure(const NoisyCleanPair& pair) {
  NoiseReport report;
  const auto aligned = aligned_originals(pair);
  report.wer = word_error_rate(concatenated_text(aligned), concatenated_text(pair.clean));
  report.attribution_error = speaker_attribution_error_rate(aligned, pair.clean);
  report.inserted_count = static_cast<std::size_t>(
      std::count_if(pair.annotation.edits.begin(), pair.annotation.edits.end(),
                    [](const NoiseEdit& e) { return std::holds_alternative<InterjectionInsert>(e); }));
  return report;
}

void to_json(nlohmann::json& j, const NoiseSpec& s) {
  j = nlohmann::json{{"word_corruption_rate", s.word_corruption_rate},
                     {"speaker_swap_rate", s.speaker_swap_rate},
                     {"interjection_rate", s.interjection_rate},
                     {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, NoiseSpec& s) {
  s.word_corruption_rate = j.at("word_corruption_rate").get<double>();
  s.speaker_swap_rate = j.at("speaker_swap_rate").get<double>();
  s.interjection_rate = j.at("interjection_rate").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.validate();
}

void to_json(nlohmann::json& j, const NoiseAnnotation& a) {
  j = nlohmann::json::array();
  for (const auto& edit : a.edits) {
    std::visit(
        [&](const auto& e) {
          using E = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<E, WordEdit>) {
            j.push_back({{"type", "word"},
                         {"utterance_index", e.utterance_index},
                         {"token_index", e.token_index},
                         {"kind", kind_name(e.kind)},
                         {"original", e.original},
                         {"replacement", e.replacement}});
          } else if constexpr (std::is_same_v<E, SpeakerSwap>) {
            j.push_back({{"type", "swap"}, {"index_a", e.index_a}, {"index_b", e.index_b}});
          } else {
            j.push_back({{"type", "interjection"}, {"position", e.position}, {"text", e.text}});
          }
        },
        edit);
  }
}

void from_json(const nlohmann::json& j, NoiseAnnotation& a) {
  a.edits.clear();
  for (const auto& e : j) {
    const auto type = e.at("type").get<std::string>();
    if (type == "word") {
      a.edits.emplace_back(WordEdit{e.at("utterance_index").get<std::size_t>(), e.at("token_index").get<std::size_t>(),
                                    kind_from(e.at("kind").get<std::string>()), e.at("original").get<std::string>(),
                                    e.at("replacement").get<std::string>()});
    } else if (type == "swap") {
      a.edits.emplace_back(SpeakerSwap{e.at("index_a").get<std::size_t>(), e.at("index_b").get<std::size_t>()});
    } else if (type == "interjection") {
      a.edits.emplace_back(InterjectionInsert{e.at("position").get<std::size_t>(), e.at("text").get<std::string>()});
    } else {
      fail(ErrorKind::InvalidValue, "unknown edit type " + type);
    }
  }
}

void to_json(nlohmann::json& j, const NoisyCleanPair& p) {
  j = nlohmann::json{{"pair_id", p.pair_id},
                     {"spec", p.spec},
                     {"clean", p.clean},
                     {"noisy", p.noisy},
                     {"annotation", p.annotation}};
}

void from_json(const nlohmann::json& j, NoisyCleanPair& p) {
  p.pair_id = j.at("pair_id").get<std::string>();
  p.spec = j.at("spec").get<NoiseSpec>();
  p.clean = j.at("clean").get<Transcript>();
  p.noisy = j.at("noisy").get<Transcript>();
  p.annotation = j.at("annotation").get<NoiseAnnotation>();
}

}  // namespace draftforge
