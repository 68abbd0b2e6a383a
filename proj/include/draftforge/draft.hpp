#pragma once

// draftforge/draft.hpp — Report drafts: four fixed sections, INSERT
// placeholders, sentence provenance, and the conclusory-statement guard.
//
// Placeholder grammar (bit-exact): "[[INSERT: " hint "]]", where hint is a
// non-empty run containing neither "[[" nor "]]". Nesting is malformed.
//
// Render format: for each section in order,
//   "## <section_id>\n" <text> "\n"
// with a blank line between sections.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "draftforge/backends.hpp"
#include "draftforge/lexicon.hpp"
#include "draftforge/transcript.hpp"

namespace draftforge {

enum class SectionId { Header, Narrative, Persons, EvidenceActions };
inline constexpr SectionId kSectionOrder[] = {SectionId::Header, SectionId::Narrative, SectionId::Persons,
                                              SectionId::EvidenceActions};

std::string_view to_string(SectionId id);
std::optional<SectionId> parse_section_id(std::string_view text);

inline constexpr std::string_view kPlaceholderOpen = "[[INSERT: ";
inline constexpr std::string_view kPlaceholderOpener = "[[INSERT:";
inline constexpr std::string_view kPlaceholderClose = "]]";

// Half-open byte range [begin, end).
struct TextRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const TextRange&) const = default;
};

struct ScannedPlaceholder {
  std::string hint;
  TextRange range;  // covers the full "[[INSERT: ...]]" occurrence
  bool operator==(const ScannedPlaceholder&) const = default;
};

// Left to right, non-overlapping. Throws MalformedPlaceholder on an opener
// that is unclosed, nested, or has an empty or ill-formed hint.
std::vector<ScannedPlaceholder> scan_placeholders(std::string_view text);

std::string placeholder_text(std::string_view hint);

struct Placeholder {
  std::size_t placeholder_id = 0;
  std::string hint;
  std::optional<std::string> resolved_text;
  SectionId section = SectionId::Header;
  std::size_t offset = 0;  // byte offset of "[[" within the section text
  bool operator==(const Placeholder&) const = default;
};

struct ProvenanceLink {
  SectionId section = SectionId::Narrative;
  std::size_t sentence_index = 0;  // line index within the section
  std::vector<std::size_t> utterance_indices;
  bool operator==(const ProvenanceLink&) const = default;
};

struct Highlight {
  SectionId section = SectionId::Narrative;
  TextRange range;
  bool operator==(const Highlight&) const = default;
};

struct Section {
  SectionId id = SectionId::Header;
  std::string text;
  bool operator==(const Section&) const = default;
};

struct DraftDocument {
  std::string draft_id;
  std::vector<Section> sections;  // always the four ids, in kSectionOrder
  std::vector<Placeholder> placeholders;
  std::vector<ProvenanceLink> provenance;
  std::vector<Highlight> highlights;
  std::string backend_used;
  std::string transcript_digest;  // sha256 of the jsonl-serialized source transcript
  bool edited = false;            // a section was replaced after generation
  bool operator==(const DraftDocument&) const = default;

  const std::string& text(SectionId id) const;
  std::size_t unresolved_count() const;
};

void to_json(nlohmann::json& j, const DraftDocument& d);
void from_json(const nlohmann::json& j, DraftDocument& d);

// Sentences of a section: one per non-empty line.
std::vector<TextRange> section_sentences(std::string_view text);

enum class RenderMode {
  Raw,       // placeholders shown as written
  Resolved,  // resolved placeholders replaced by their text
};
std::string render(const DraftDocument& draft, RenderMode mode = RenderMode::Raw);

// Range of a placeholder within render(draft, Raw).
TextRange rendered_span(const DraftDocument& draft, const Placeholder& placeholder);

// Placeholders scanned from section text in section order, all unresolved.
// Ids are dense 0..k-1.
std::vector<Placeholder> collect_placeholders(const std::vector<Section>& sections);

// Lines holding a placeholder in any section, plus narrative lines that no
// provenance link covers.
std::vector<Highlight> compute_highlights(const std::vector<Section>& sections,
                                          const std::vector<ProvenanceLink>& provenance);

// Replaces one section's text. The section's placeholder hints must keep
// their sequence; resolutions carry over. Narrative links survive only for
// lines whose text is unchanged. Throws InvalidValue, MalformedPlaceholder.
DraftDocument with_section_text(const DraftDocument& draft, SectionId section, std::string text);

// Sets a placeholder's resolution (trimmed). Throws UnknownPlaceholder for a
// missing or already resolved id, EmptyResolution for blank text, InvalidValue
// for text containing a line break or a delimiter sequence.
DraftDocument with_resolution(const DraftDocument& draft, std::size_t placeholder_id, std::string_view text);

// Checks the structural invariants: section order, placeholder spans at
// exact delimiter occurrences with dense ids, provenance indices in range,
// narrative sentences without a placeholder provenanced (unedited baseline drafts),
// and the transcript digest. Throws InvalidValue with the first violation.
void validate_draft(const DraftDocument& draft, const Transcript& transcript);

struct Violation {
  std::string term;
  SectionId section = SectionId::Header;
  std::size_t offset = 0;
  bool operator==(const Violation&) const = default;
};

// Every whole-word, case-insensitive occurrence of a lexicon term in draft
// text or resolved placeholder text, unless the term occurs in some utterance.
std::vector<Violation> conclusory_guard(const DraftDocument& draft, const Transcript& transcript,
                                        const std::vector<std::string>& lexicon);

inline constexpr std::string_view kBaselineDrafterName = "baseline-drafter-v1";

class DraftEngine {
 public:
  // preamble: fixed drafting instructions, prepended verbatim to prompts.
  DraftEngine(std::string preamble, ModelAdapters adapters);

  // preamble + plain-serialized utterances. Takes no case metadata.
  std::string assemble_prompt(const Transcript& transcript) const;

  // Throws EmptyTranscript, InvalidValue (role mismatch),
  // MalformedBackendOutput, BackendUnavailable, TimeoutExceeded.
  DraftDocument generate_draft(const Transcript& transcript, const std::vector<EventRecord>& events,
                               const BackendDescriptor& backend) const;

  const ModelAdapters& adapters() const noexcept { return adapters_; }

 private:
  std::string preamble_;
  ModelAdapters adapters_;
};

// Pure baseline drafter; deterministic in its inputs.
DraftDocument baseline_draft(const Transcript& transcript, const std::vector<EventRecord>& events);

// Parses a remote payload of "## <section_id>" blocks. Every section must
// appear exactly once. Narrative sentences without placeholders are highlighted.
DraftDocument parse_draft_payload(std::string_view payload, const Transcript& transcript, std::string backend_used);

}  // namespace draftforge
