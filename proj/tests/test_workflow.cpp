#include <doctest.h>

#include <deque>
#include <fstream>
#include <functional>
#include <random>
#include <set>

#include "draftforge/digest.hpp"
#include "draftforge/draft.hpp"
#include "draftforge/workflow.hpp"
#include "support.hpp"

using namespace draftforge;
using nlohmann::json;
using testing_support::error_kind_of;
using testing_support::TempDir;
using testing_support::transcript_of;
using testing_support::utt;

namespace {

const std::string kTs = "2026-01-01T00:00:00.000Z";

const Transcript& transcript() {
  static const auto t = transcript_of({utt(0, "OFC1", SpeakerRole::Officer, "What happened?"),
                                       utt(1, "W1", SpeakerRole::Witness, "Someone broke the window.")});
  return t;
}

// Draft with k header placeholders and a fixed body, as a remote drafter would return it.
DraftDocument draft_with(std::size_t k, const std::string& flavor = "a") {
  std::string payload = "## header\n";
  for (std::size_t i = 0; i < k; ++i) payload += "Field " + std::to_string(i) + ": [[INSERT: field " + std::to_string(i) + "]]\n";
  payload += "Draft flavor " + flavor + "\n## narrative\nSomeone broke the window.\n## persons\nWitness: caller\n"
             "## evidence_actions\nNo items were identified in the transcript.\n";
  return parse_draft_payload(payload, transcript(), "remote:test");
}

EvidenceRef audio_ref() {
  return EvidenceRef{sha256_hex("audio-bytes"), MediaKind::Audio, 11, "objects/x"};
}

CaseRecord step(const CaseRecord& r, const Action& a) { return transition(r, a); }

CaseRecord generated_case(std::size_t k) {
  auto r = create_case("case-1", "officer", kTs);
  r = step(r, attach_action(audio_ref(), "officer", kTs));
  r = step(r, metadata_action(CaseMetadata{"theft", ChargeSeverity::Misdemeanor, "J. Doe", "N-1"}, "officer", kTs));
  return step(r, generate_action(draft_with(k), audio_ref().digest, "officer", kTs));
}

}  // namespace

TEST_CASE("full happy path reaches Submitted with a verified audit") {
  auto r = generated_case(2);
  CHECK(r.state == CaseState::DraftGenerated);
  r = step(r, resolve_action(0, "Jane Smith", "officer", kTs));
  CHECK(r.state == CaseState::Editing);
  r = step(r, resolve_action(1, "4471", "officer", kTs));
  CHECK(r.state == CaseState::ReadyToSign);
  r = step(r, sign_action("Jane Doe", "officer", kTs));
  CHECK(r.state == CaseState::Signed);
  r = step(r, submit_action("officer", kTs));
  CHECK(r.state == CaseState::Submitted);
  CHECK(r.audit.size() == 8);
  CHECK(verify_audit(r));
  CHECK(r.signature->full_name == "Jane Doe");
  CHECK(replay_case(r.audit) == r);
  for (auto kind : {ActionKind::Attach, ActionKind::Edit, ActionKind::Sign, ActionKind::Submit, ActionKind::Resolve})
    CHECK_FALSE(action_allowed(CaseState::Submitted, kind));
}

TEST_CASE("sign with two unresolved placeholders is refused with the count") {
  const auto r = generated_case(2);
  try {
    transition(r, sign_action("Jane Doe", "officer", kTs));
    FAIL("expected PlaceholdersUnresolved");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PlaceholdersUnresolved);
    CHECK(e.count() == 2);
    CHECK(e.is(ErrorKind::InvalidTransition));
  }
}

TEST_CASE("submit from ReadyToSign without a signature is an invalid transition") {
  auto r = generated_case(1);
  r = step(r, resolve_action(0, "x", "officer", kTs));
  REQUIRE(r.state == CaseState::ReadyToSign);
  try {
    transition(r, submit_action("officer", kTs));
    FAIL("expected SignatureMissing");
  } catch (const Error& e) {
    CHECK(e.is(ErrorKind::InvalidTransition));
    CHECK(e.kind() == ErrorKind::SignatureMissing);
  }
}

TEST_CASE("resolve rules") {
  auto r = generated_case(1);
  CHECK(error_kind_of([&] { transition(r, resolve_action(0, "   ", "officer", kTs)); }) == ErrorKind::EmptyResolution);
  auto r2 = generated_case(2);
  r2 = step(r2, resolve_action(0, "x", "officer", kTs));
  CHECK(error_kind_of([&] { transition(r2, resolve_action(0, "y", "officer", kTs)); }) ==
        ErrorKind::UnknownPlaceholder);
  CHECK(error_kind_of([&] { transition(r2, resolve_action(7, "y", "officer", kTs)); }) ==
        ErrorKind::UnknownPlaceholder);
  r = step(r, resolve_action(0, "x", "officer", kTs));
  CHECK(r.state == CaseState::ReadyToSign);
}

TEST_CASE("sign rules") {
  auto r = generated_case(1);
  r = step(r, resolve_action(0, "x", "officer", kTs));
  CHECK(error_kind_of([&] { transition(r, sign_action("Jane", "officer", kTs)); }) == ErrorKind::InvalidName);
  CHECK(error_kind_of([&] { transition(r, sign_action("   ", "officer", kTs)); }) == ErrorKind::InvalidName);
  CHECK(step(r, sign_action("Jane Doe", "officer", kTs)).state == CaseState::Signed);

  auto editing = generated_case(2);
  editing = step(editing, resolve_action(0, "x", "officer", kTs));
  REQUIRE(editing.state == CaseState::Editing);
  try {
    transition(editing, sign_action("Jane Doe", "officer", kTs));
    FAIL("expected refusal");
  } catch (const Error& e) {
    CHECK(e.is(ErrorKind::InvalidTransition));
  }
  CHECK(valid_full_name("Jane Q Doe"));
  CHECK_FALSE(valid_full_name("Jane"));
}

TEST_CASE("zero-placeholder draft reaches ReadyToSign through an edit") {
  auto r = generated_case(0);
  CHECK(error_kind_of([&] { transition(r, sign_action("Jane Doe", "officer", kTs)); }) ==
        ErrorKind::InvalidTransition);
  r = step(r, edit_action(SectionId::Narrative, r.draft->text(SectionId::Narrative), "officer", kTs));
  CHECK(r.state == CaseState::ReadyToSign);
  r = step(r, edit_action(SectionId::Persons, "Witness: the caller", "officer", kTs));
  CHECK(r.state == CaseState::ReadyToSign);
  CHECK(r.draft->edited);
}

TEST_CASE("regeneration discards resolutions and edits") {
  auto r = generated_case(3);
  r = step(r, resolve_action(0, "x", "officer", kTs));
  r = step(r, edit_action(SectionId::Narrative, "Edited narrative.", "officer", kTs));
  const auto fresh = draft_with(2, "b");
  r = step(r, generate_action(fresh, audio_ref().digest, "officer", kTs, true));
  CHECK(r.state == CaseState::DraftGenerated);
  CHECK(r.draft->unresolved_count() == 2);
  CHECK(*r.draft == fresh);
  CHECK(error_kind_of([&] { transition(r, generate_action(fresh, audio_ref().digest, "officer", kTs)); }) ==
        ErrorKind::InvalidTransition);
}

TEST_CASE("generate rejects drafts whose placeholder table disagrees with the text") {
  auto r = create_case("case-1", "officer", kTs);
  r = step(r, attach_action(audio_ref(), "officer", kTs));
  r = step(r, metadata_action(CaseMetadata{}, "officer", kTs));
  auto bad = draft_with(2);
  bad.placeholders[1].resolved_text = "sneaky";
  CHECK(error_kind_of([&] { transition(r, generate_action(bad, audio_ref().digest, "officer", kTs)); }) ==
        ErrorKind::InvalidValue);
  bad = draft_with(2);
  bad.placeholders.pop_back();
  CHECK(error_kind_of([&] { transition(r, generate_action(bad, audio_ref().digest, "officer", kTs)); }) ==
        ErrorKind::InvalidValue);
}

TEST_CASE("create_case validates the id and starts a verified chain") {
  const auto r = create_case("case-000001", "officer", kTs);
  CHECK(r.state == CaseState::Created);
  CHECK(r.audit.size() == 1);
  CHECK(r.audit[0].prev_digest == kGenesisDigest);
  CHECK(verify_audit(r));
  CHECK(error_kind_of([] { create_case("../etc", "o", kTs); }) == ErrorKind::InvalidValue);
  CHECK(error_kind_of([] { create_case("", "o", kTs); }) == ErrorKind::InvalidValue);
}

TEST_CASE("verify_audit detects any single-entry tamper") {
  auto r = generated_case(2);
  r = step(r, resolve_action(0, "Jane Smith", "officer", kTs));
  r = step(r, resolve_action(1, "4471", "officer", kTs));
  r = step(r, sign_action("Jane Doe", "officer", kTs));
  r = step(r, submit_action("officer", kTs));
  REQUIRE(verify_audit(r));
  for (std::size_t i = 0; i < r.audit.size(); ++i) {
    std::vector<std::function<void(AuditEntry&)>> tampers = {
        [](AuditEntry& e) { e.payload_digest[0] = e.payload_digest[0] == 'a' ? 'b' : 'a'; },
        [](AuditEntry& e) { e.payload["tampered"] = true; },
        [](AuditEntry& e) { e.actor += "x"; },
        [](AuditEntry& e) { e.action = "edit"; },
        [](AuditEntry& e) { e.timestamp = "2030-01-01T00:00:00.000Z"; },
        [](AuditEntry& e) { e.seq += 1; },
        [](AuditEntry& e) { e.prev_digest[5] = e.prev_digest[5] == 'f' ? 'e' : 'f'; },
    };
    for (const auto& tamper : tampers) {
      auto t = r;
      tamper(t.audit[i]);
      REQUIRE_FALSE(verify_audit(t));
    }
  }
  auto head = r;
  head.audit_head[0] = head.audit_head[0] == '0' ? '1' : '0';
  CHECK_FALSE(verify_audit(head));
  auto dropped = r;
  dropped.audit.erase(dropped.audit.begin() + 3);
  CHECK_FALSE(verify_audit(dropped));
  auto tampered = r.audit;
  tampered[2].payload["metadata"]["officer_name"] = "Someone Else";
  CHECK(error_kind_of([&] { replay_case(tampered); }) == ErrorKind::InvalidValue);
}

TEST_CASE("case log persists and replays; tampering is detected on load") {
  TempDir dir;
  CaseLog log(dir.path());
  auto r = generated_case(1);
  for (const auto& e : r.audit) log.append(r.case_id, e);
  CHECK(log.load(r.case_id) == r);
  CHECK(log.case_ids() == std::vector<std::string>{r.case_id});
  CHECK(error_kind_of([&] { log.load("case-missing"); }) == ErrorKind::NotFound);

  auto text = read_text_file(log.path_for(r.case_id));
  const auto pos = text.find("J. Doe");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 6, "X. Roe");
  {
    std::ofstream out(log.path_for(r.case_id), std::ios::trunc);
    out << text;
  }
  CHECK(error_kind_of([&] { log.load(r.case_id); }) == ErrorKind::InvalidValue);
}

TEST_CASE("record json round trip") {
  auto r = generated_case(2);
  r = step(r, resolve_action(1, "x", "officer", kTs));
  const json j = r;
  CHECK(j.get<CaseRecord>() == r);
}

namespace {

// Action alphabet used by the model checker and the fuzzer. Edits draw from
// texts tied to the current draft so the abstract state space stays finite.
std::vector<Action> candidate_actions(const CaseRecord& r) {
  std::vector<Action> out;
  out.push_back(attach_action(audio_ref(), "officer", kTs));
  out.push_back(metadata_action(CaseMetadata{"theft", ChargeSeverity::Felony, "A B", "1"}, "officer", kTs));
  static const auto generated = [] {
    std::vector<Action> g;
    for (std::size_t k = 0; k <= 3; ++k) {
      g.push_back(generate_action(draft_with(k), audio_ref().digest, "officer", kTs));
      g.push_back(generate_action(draft_with(k, "b"), audio_ref().digest, "officer", kTs, true));
    }
    return g;
  }();
  out.insert(out.end(), generated.begin(), generated.end());
  for (std::size_t id = 0; id <= 3; ++id) {
    out.push_back(resolve_action(id, "value " + std::to_string(id), "officer", kTs));
    out.push_back(resolve_action(id, " ", "officer", kTs));
  }
  if (r.draft) {
    out.push_back(edit_action(SectionId::Narrative, r.draft->text(SectionId::Narrative), "officer", kTs));
    out.push_back(edit_action(SectionId::Header, "Header without placeholders", "officer", kTs));
    out.push_back(edit_action(SectionId::Persons, "Witness: caller\nVictim: owner", "officer", kTs));
  }
  out.push_back(sign_action("Jane Doe", "officer", kTs));
  out.push_back(sign_action("Jane", "officer", kTs));
  out.push_back(submit_action("officer", kTs));
  return out;
}

// Invariants that must hold for every record transition() can produce.
void check_invariants(const CaseRecord& r) {
  REQUIRE(verify_audit(r));
  if (r.state == CaseState::Submitted || r.state == CaseState::Signed) {
    REQUIRE(r.signature.has_value());
    REQUIRE(valid_full_name(r.signature->full_name));
  }
  if (r.state == CaseState::Submitted || r.state == CaseState::Signed || r.state == CaseState::ReadyToSign) {
    REQUIRE(r.draft.has_value());
    REQUIRE(r.draft->unresolved_count() == 0);
  }
  if (r.state >= CaseState::DraftGenerated) {
    REQUIRE(r.draft.has_value());
    REQUIRE(r.metadata.has_value());
    REQUIRE_FALSE(r.evidence.empty());
  }
  if (r.state < CaseState::Signed) REQUIRE_FALSE(r.signature.has_value());
}

std::string abstract_key(const CaseRecord& r) {
  json j = r;
  j.erase("audit");
  j.erase("audit_head");
  return j.dump();
}

}  // namespace

TEST_CASE("exhaustive state-graph search with up to three placeholders") {
  std::deque<CaseRecord> frontier{create_case("case-1", "officer", kTs)};
  std::set<std::string> seen{abstract_key(frontier.front())};
  std::size_t submitted = 0, edges = 0;
  std::set<CaseState> states;
  while (!frontier.empty()) {
    const auto r = frontier.front();
    frontier.pop_front();
    states.insert(r.state);
    for (const auto& a : candidate_actions(r)) {
      CaseRecord next;
      try {
        next = transition(r, a);
      } catch (const Error&) {
        continue;
      }
      ++edges;
      REQUIRE(next.audit.size() == r.audit.size() + 1);
      check_invariants(next);
      if (next.state == CaseState::Submitted) {
        ++submitted;
        REQUIRE(next.draft->unresolved_count() == 0);
        REQUIRE(next.signature.has_value());
      }
      if (seen.insert(abstract_key(next)).second) frontier.push_back(std::move(next));
    }
  }
  CHECK(states.size() == 8);
  CHECK(submitted > 0);
  MESSAGE("abstract states: " << seen.size() << ", edges: " << edges);
}

TEST_CASE("random action-sequence fuzz") {
  std::mt19937_64 rng(1337);
  const int runs = 100000;
  std::size_t reached_submitted = 0;
  for (int run = 0; run < runs; ++run) {
    auto r = create_case("case-1", "officer", kTs);
    const int len = 1 + static_cast<int>(rng() % 16);
    for (int i = 0; i < len; ++i) {
      auto actions = candidate_actions(r);
      // Three times in four, draw only among kinds the state accepts so deep states are reached.
      if (rng() % 4 != 0) {
        std::erase_if(actions, [&](const Action& x) { return !action_allowed(r.state, x.kind); });
        if (actions.empty()) break;
      }
      const auto& a = actions[rng() % actions.size()];
      const auto length = r.audit.size();
      try {
        r = transition(r, a);
      } catch (const Error&) {
        continue;
      }
      REQUIRE(r.audit.size() == length + 1);
      check_invariants(r);
    }
    reached_submitted += r.state == CaseState::Submitted;
  }
  CHECK(reached_submitted > 1000);
  MESSAGE("runs ending in Submitted: " << reached_submitted);
}
