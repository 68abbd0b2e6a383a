#pragma once

// draftforge/workflow.hpp — Review state machine with a hash-chained audit log.
//
// Edges:
//   Created          --attach-->         EvidenceAttached   (attach repeats in EvidenceAttached)
//   EvidenceAttached --enter_metadata--> MetadataEntered
//   MetadataEntered  --generate-->       DraftGenerated
//   DraftGenerated   --resolve|edit-->   Editing            (then ReadyToSign when nothing is unresolved)
//   Editing          --resolve|edit-->   Editing | ReadyToSign
//   DraftGenerated, Editing --regenerate--> DraftGenerated  (resolutions and edits discarded)
//   ReadyToSign      --edit-->           ReadyToSign
//   ReadyToSign      --sign-->           Signed
//   Signed           --submit-->         Submitted          (terminal)
//
// Every successful transition appends exactly one audit entry. The record is
// a fold of its audit entries: replay(audit) reproduces it.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "draftforge/draft.hpp"
#include "draftforge/transcript.hpp"

namespace draftforge {

enum class CaseState { Created, EvidenceAttached, MetadataEntered, DraftGenerated, Editing, ReadyToSign, Signed, Submitted };

std::string_view to_string(CaseState state);
std::optional<CaseState> parse_case_state(std::string_view text);

enum class ActionKind { Create, Attach, EnterMetadata, Generate, Regenerate, Resolve, Edit, Sign, Submit };

std::string_view to_string(ActionKind kind);
std::optional<ActionKind> parse_action_kind(std::string_view text);

enum class MediaKind { Audio, TranscriptSidecar };
std::string_view to_string(MediaKind kind);

struct EvidenceRef {
  std::string digest;  // sha256 of the stored bytes
  MediaKind media_kind = MediaKind::Audio;
  std::uint64_t byte_length = 0;
  std::string stored_at;
  bool operator==(const EvidenceRef&) const = default;
};

void to_json(nlohmann::json& j, const EvidenceRef& e);
void from_json(const nlohmann::json& j, EvidenceRef& e);

struct Signature {
  std::string full_name;
  std::string timestamp;
  bool operator==(const Signature&) const = default;
};

inline constexpr std::string_view kGenesisDigest = "0000000000000000000000000000000000000000000000000000000000000000";

struct AuditEntry {
  std::uint64_t seq = 0;
  std::string actor;
  std::string action;
  std::string timestamp;
  nlohmann::json payload;
  std::string payload_digest;  // sha256 of payload.dump()
  std::string prev_digest;     // entry_digest of the previous entry, genesis for seq 0
  bool operator==(const AuditEntry&) const = default;
};

void to_json(nlohmann::json& j, const AuditEntry& e);
void from_json(const nlohmann::json& j, AuditEntry& e);

// Chained digest over (prev_digest, payload_digest, seq, actor, action, timestamp).
std::string entry_digest(const AuditEntry& entry);

struct CaseRecord {
  std::string case_id;
  CaseState state = CaseState::Created;
  std::optional<CaseMetadata> metadata;
  std::vector<EvidenceRef> evidence;
  std::optional<std::string> transcript_ref;  // digest of the evidence the draft was generated from
  std::optional<DraftDocument> draft;
  std::optional<Signature> signature;
  std::vector<AuditEntry> audit;
  std::string audit_head;  // entry_digest of the last audit entry
  std::string digest_algorithm = "sha256";
  bool operator==(const CaseRecord&) const = default;
};

void to_json(nlohmann::json& j, const CaseRecord& c);
void from_json(const nlohmann::json& j, CaseRecord& c);

struct Action {
  ActionKind kind = ActionKind::Create;
  std::string actor;
  std::string timestamp;
  nlohmann::json payload = nlohmann::json::object();
};

// Payload builders.
Action attach_action(const EvidenceRef& evidence, std::string actor, std::string timestamp);
Action metadata_action(const CaseMetadata& metadata, std::string actor, std::string timestamp);
// transcript_ref: digest of the evidence the draft was generated from.
Action generate_action(const DraftDocument& draft, const std::string& transcript_ref, std::string actor,
                       std::string timestamp, bool regenerate = false);
Action resolve_action(std::size_t placeholder_id, std::string text, std::string actor, std::string timestamp);
Action edit_action(SectionId section, std::string text, std::string actor, std::string timestamp);
Action sign_action(std::string full_name, std::string actor, std::string timestamp);
Action submit_action(std::string actor, std::string timestamp);

// Fresh Created case with its genesis "create" entry.
CaseRecord create_case(std::string case_id, std::string actor, std::string timestamp);

// Throws InvalidTransition (and its refinements PlaceholdersUnresolved with
// the unresolved count, SignatureMissing), UnknownPlaceholder,
// EmptyResolution, InvalidName, InvalidValue. The input is never modified.
CaseRecord transition(const CaseRecord& record, const Action& action);

// Whether kind is accepted in state, ignoring payload validity.
bool action_allowed(CaseState state, ActionKind kind);

// At least two whitespace-separated tokens.
bool valid_full_name(std::string_view name);

// True iff seq is dense, payload digests match, the chain links, and the
// head matches the last entry.
bool verify_audit(const CaseRecord& record);

// Folds audit entries through transition(). Throws InvalidValue if the
// entries do not reproduce themselves (tampered or reordered log).
CaseRecord replay_case(const std::vector<AuditEntry>& entries);

// ISO-8601 UTC with milliseconds.
std::string now_timestamp();

// One jsonl file per case under root: <case_id>.log. Appends are flushed
// before returning.
class CaseLog {
 public:
  explicit CaseLog(std::filesystem::path root);

  void append(const std::string& case_id, const AuditEntry& entry) const;
  // Throws NotFound, IoFailure, InvalidValue.
  CaseRecord load(const std::string& case_id) const;
  std::vector<std::string> case_ids() const;
  std::filesystem::path path_for(const std::string& case_id) const;

 private:
  std::filesystem::path root_;
};

}  // namespace draftforge
