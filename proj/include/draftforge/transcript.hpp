#pragma once

// draftforge/transcript.hpp — Dialogue, case metadata and event record types,
// transcript parsing/serialization, and the two transcript error metrics.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace draftforge {

enum class SpeakerRole { Officer, Suspect, Witness, Victim, PersonOfInterest, Dispatch, Unknown };

// Canonical tokens: OFFICER SUSPECT WITNESS VICTIM POI DISPATCH UNKNOWN.
std::string_view role_token(SpeakerRole role);
// Accepts the canonical tokens case-insensitively, plus "person_of_interest"
// and "PersonOfInterest".
std::optional<SpeakerRole> parse_role(std::string_view token);

struct Utterance {
  std::size_t index = 0;
  std::string speaker_id;
  SpeakerRole role = SpeakerRole::Unknown;
  std::string text;
  std::optional<std::int64_t> start_ms;
  std::optional<std::int64_t> end_ms;

  bool operator==(const Utterance&) const = default;
};

enum class TranscriptSource { Asr, Simulated };

struct Transcript {
  std::string transcript_id;
  std::vector<Utterance> utterances;
  TranscriptSource source = TranscriptSource::Asr;

  bool empty() const noexcept { return utterances.empty(); }
  std::size_t size() const noexcept { return utterances.size(); }

  bool operator==(const Transcript&) const = default;
};

enum class ChargeSeverity { Misdemeanor, Felony, Unspecified };

std::string_view to_string(ChargeSeverity severity);
std::optional<ChargeSeverity> parse_charge_severity(std::string_view text);

// Officer-entered incident details. Never an input to prompt assembly or
// drafting; the draft engine has no entry point that accepts it.
struct CaseMetadata {
  std::string incident_type;
  ChargeSeverity charge_severity = ChargeSeverity::Unspecified;
  std::string officer_name;
  std::string case_number;

  bool operator==(const CaseMetadata&) const = default;
};

struct EventActor {
  SpeakerRole role = SpeakerRole::Unknown;
  std::string descriptor;

  bool operator==(const EventActor&) const = default;
};

struct EventAction {
  std::size_t actor = 0;  // index into EventRecord::actors
  std::string verb_phrase;
  std::string object;
  std::string time_hint;
  std::string location_hint;

  bool operator==(const EventAction&) const = default;
};

struct EventRecord {
  std::string record_id;
  std::string offense_label;
  std::vector<EventActor> actors;
  std::vector<EventAction> actions;
  std::string location;
  std::vector<std::string> outcome_fields;

  bool operator==(const EventRecord&) const = default;
};

// Throws Error(InvalidValue) when the record has no actor, no action, or an
// action whose actor index does not resolve.
void validate_event(const EventRecord& event);

// Throws Error(InvalidValue) on an invariant violation: empty or untrimmed
// text, embedded line breaks, start_ms > end_ms, or non-dense indices.
void validate_utterance(const Utterance& utterance);
void validate_transcript(const Transcript& transcript);

enum class TranscriptFormat { Jsonl, Plain };

// jsonl: one object per line {index, speaker, role, text, start_ms?, end_ms?}.
// plain: "ROLE speaker_id: text" per line; line order gives the index.
// Blank lines are skipped. Errors: MalformedLine (count = 1-based line),
// EmptyTranscript, DuplicateIndex.
Transcript parse_transcript(std::string_view raw, TranscriptFormat format,
                            std::string transcript_id = {},
                            TranscriptSource source = TranscriptSource::Asr);

// Inverse of parse_transcript. Plain output drops timestamps.
std::string serialize_transcript(const Transcript& transcript, TranscriptFormat format);

// Whitespace tokens, ASCII case-folded, with trailing . , ? ! stripped.
std::vector<std::string> wer_tokens(std::string_view text);

std::size_t token_edit_distance(const std::vector<std::string>& hypothesis,
                                const std::vector<std::string>& reference);

// (S + I + D) / |reference tokens|. Throws EmptyReference.
double word_error_rate(std::string_view hypothesis, std::string_view reference);

// Fraction of positions whose speaker_id differs. Throws LengthMismatch.
double speaker_attribution_error_rate(const Transcript& hypothesis, const Transcript& reference);

// Texts of all utterances joined by single spaces.
std::string concatenated_text(const Transcript& transcript);

std::string trim(std::string_view text);
std::string to_lower_ascii(std::string_view text);

}  // namespace draftforge
