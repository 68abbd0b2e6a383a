#pragma once

// draftforge/noise.hpp — Three corruption channels that turn a clean
// simulated dialogue into a noisy one, with an exact, replayable edit trace.
//
// Channels run in a fixed order:
//   1. word corruption   — per token, with probability p_w, substitute (from
//                          the confusion lexicon), delete, or insert a filler,
//                          each chosen uniformly;
//   2. speaker swap      — each utterance is selected with probability p_s;
//                          consecutive selected utterances are paired and
//                          exchange speaker_id and role;
//   3. interjection      — after each original utterance, with probability
//                          p_i, one lexicon utterance with role Unknown.
// Original utterances are never reordered.

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "draftforge/lexicon.hpp"
#include "draftforge/transcript.hpp"

namespace draftforge {

// Name recorded in corpus manifests. Bernoulli draws use the top 53 bits of
// each output; bounded draws use output % n.
inline constexpr std::string_view kPrngAlgorithm = "mt19937_64";
inline constexpr std::string_view kInterjectionSpeaker = "BG";

struct NoiseSpec {
  double word_corruption_rate = 0.0;
  double speaker_swap_rate = 0.0;
  double interjection_rate = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const NoiseSpec&) const = default;
};

enum class WordEditKind { Substitute, Delete, Insert };

// token_index is a position in the utterance's token list as it stands when
// the edit is applied (edits of one utterance apply left to right).
struct WordEdit {
  std::size_t utterance_index = 0;
  std::size_t token_index = 0;
  WordEditKind kind = WordEditKind::Substitute;
  std::string original;
  std::string replacement;
  bool operator==(const WordEdit&) const = default;
};

struct SpeakerSwap {
  std::size_t index_a = 0;
  std::size_t index_b = 0;
  bool operator==(const SpeakerSwap&) const = default;
};

// position is the index the new utterance occupies once inserted.
struct InterjectionInsert {
  std::size_t position = 0;
  std::string text;
  bool operator==(const InterjectionInsert&) const = default;
};

using NoiseEdit = std::variant<WordEdit, SpeakerSwap, InterjectionInsert>;

struct NoiseAnnotation {
  std::vector<NoiseEdit> edits;
  bool empty() const noexcept { return edits.empty(); }
  bool operator==(const NoiseAnnotation&) const = default;
};

struct NoisyCleanPair {
  std::string pair_id;
  Transcript clean;
  Transcript noisy;
  NoiseAnnotation annotation;
  NoiseSpec spec;
  bool operator==(const NoisyCleanPair&) const = default;
};

struct NoiseReport {
  double wer = 0.0;
  double attribution_error = 0.0;
  std::size_t inserted_count = 0;
};

// Whitespace tokenization used by the word channel and by replay.
std::vector<std::string> noise_tokens(std::string_view text);

class NoiseEngine {
 public:
  explicit NoiseEngine(LexiconSet lexicons);

  // Deterministic for fixed (clean, spec). Throws EmptyTranscript, or
  // InvalidValue when clean contains an Unknown role or the spec is invalid.
  NoisyCleanPair corrupt(const Transcript& clean, const NoiseSpec& spec, std::string pair_id = {}) const;

  const LexiconSet& lexicons() const noexcept { return lexicons_; }

 private:
  LexiconSet lexicons_;
};

// Applies an annotation to the clean transcript. Throws IndexOutOfRange when
// an edit does not fit the transcript it is applied to.
Transcript replay(const Transcript& clean, const NoiseAnnotation& annotation);

// The noisy transcript with inserted interjections removed, so positions align
// with the clean transcript.
Transcript aligned_originals(const NoisyCleanPair& pair);

NoiseReport measure(const NoisyCleanPair& pair);

// Identifier the noisy transcript receives for a given clean transcript.
std::string noisy_transcript_id(const Transcript& clean);

void to_json(nlohmann::json& j, const NoiseSpec& s);
void from_json(const nlohmann::json& j, NoiseSpec& s);
void to_json(nlohmann::json& j, const NoiseAnnotation& a);
void from_json(const nlohmann::json& j, NoiseAnnotation& a);
// {pair_id, spec, clean, noisy, annotation}
void to_json(nlohmann::json& j, const NoisyCleanPair& p);
void from_json(const nlohmann::json& j, NoisyCleanPair& p);

}  // namespace draftforge
