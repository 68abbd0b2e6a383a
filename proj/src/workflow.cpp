#include "draftforge/workflow.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <regex>
#include <sstream>

#include "draftforge/codec.hpp"
#include "draftforge/digest.hpp"
#include "draftforge/error.hpp"

namespace draftforge {

namespace {

using nlohmann::json;

constexpr CaseState kStates[] = {CaseState::Created,        CaseState::EvidenceAttached, CaseState::MetadataEntered,
                                 CaseState::DraftGenerated, CaseState::Editing,          CaseState::ReadyToSign,
                                 CaseState::Signed,         CaseState::Submitted};
constexpr ActionKind kActions[] = {ActionKind::Create,  ActionKind::Attach, ActionKind::EnterMetadata,
                                   ActionKind::Generate, ActionKind::Regenerate, ActionKind::Resolve,
                                   ActionKind::Edit,    ActionKind::Sign,   ActionKind::Submit};

[[noreturn]] void invalid(CaseState state, ActionKind kind) {
  fail(ErrorKind::InvalidTransition,
       std::string(to_string(kind)) + " is not allowed in state " + std::string(to_string(state)));
}

void append_entry(CaseRecord& record, const Action& action) {
  AuditEntry e;
  e.seq = record.audit.size();
  e.actor = action.actor;
  e.action = std::string(to_string(action.kind));
  e.timestamp = action.timestamp;
  e.payload = action.payload;
  e.payload_digest = sha256_hex(e.payload.dump());
  e.prev_digest = record.audit.empty() ? std::string(kGenesisDigest) : record.audit_head;
  record.audit_head = entry_digest(e);
  record.audit.push_back(std::move(e));
}

DraftDocument fresh_draft(const json& payload) {
  auto draft = payload.at("draft").get<DraftDocument>();
  if (draft.edited || draft.placeholders != collect_placeholders(draft.sections))
    fail(ErrorKind::InvalidValue, "generated draft placeholders must match its text and be unresolved");
  return draft;
}

void settle_editing(CaseRecord& r) {
  r.state = r.draft->unresolved_count() == 0 ? CaseState::ReadyToSign : CaseState::Editing;
}

}  // namespace

std::string_view to_string(CaseState state) {
  switch (state) {
    case CaseState::Created: return "Created";
    case CaseState::EvidenceAttached: return "EvidenceAttached";
    case CaseState::MetadataEntered: return "MetadataEntered";
    case CaseState::DraftGenerated: return "DraftGenerated";
    case CaseState::Editing: return "Editing";
    case CaseState::ReadyToSign: return "ReadyToSign";
    case CaseState::Signed: return "Signed";
    case CaseState::Submitted: return "Submitted";
  }
  return "Created";
}

std::optional<CaseState> parse_case_state(std::string_view text) {
  for (auto s : kStates) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::Create: return "create";
    case ActionKind::Attach: return "attach";
    case ActionKind::EnterMetadata: return "enter_metadata";
    case ActionKind::Generate: return "generate";
    case ActionKind::Regenerate: return "regenerate";
    case ActionKind::Resolve: return "resolve";
    case ActionKind::Edit: return "edit";
    case ActionKind::Sign: return "sign";
    case ActionKind::Submit: return "submit";
  }
  return "create";
}

std::optional<ActionKind> parse_action_kind(std::string_view text) {
  for (auto k : kActions) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string_view to_string(MediaKind kind) { return kind == MediaKind::Audio ? "audio" : "transcript_sidecar"; }

void to_json(json& j, const EvidenceRef& e) {
  j = json{{"digest", e.digest},
           {"media_kind", to_string(e.media_kind)},
           {"byte_length", e.byte_length},
           {"stored_at", e.stored_at}};
}

void from_json(const json& j, EvidenceRef& e) {
  e.digest = j.at("digest").get<std::string>();
  const auto kind = j.at("media_kind").get<std::string>();
  if (kind == "audio") e.media_kind = MediaKind::Audio;
  else if (kind == "transcript_sidecar") e.media_kind = MediaKind::TranscriptSidecar;
  else fail(ErrorKind::InvalidValue, "unknown media_kind " + kind);
  e.byte_length = j.at("byte_length").get<std::uint64_t>();
  e.stored_at = j.at("stored_at").get<std::string>();
}

void to_json(json& j, const AuditEntry& e) {
  j = json{{"seq", e.seq},
           {"actor", e.actor},
           {"action", e.action},
           {"timestamp", e.timestamp},
           {"payload", e.payload},
           {"payload_digest", e.payload_digest},
           {"prev_digest", e.prev_digest}};
}

void from_json(const json& j, AuditEntry& e) {
  e.seq = j.at("seq").get<std::uint64_t>();
  e.actor = j.at("actor").get<std::string>();
  e.action = j.at("action").get<std::string>();
  e.timestamp = j.at("timestamp").get<std::string>();
  e.payload = j.at("payload");
  e.payload_digest = j.at("payload_digest").get<std::string>();
  e.prev_digest = j.at("prev_digest").get<std::string>();
}

std::string entry_digest(const AuditEntry& e) {
  std::string material = e.prev_digest;
  for (const auto* part : {&e.payload_digest, &e.actor, &e.action, &e.timestamp}) {
    material += '\n';
    material += *part;
  }
  material += '\n';
  material += std::to_string(e.seq);
  return sha256_hex(material);
}

void to_json(json& j, const CaseRecord& c) {
  j = json::object();
  j["case_id"] = c.case_id;
  j["state"] = to_string(c.state);
  j["metadata"] = c.metadata ? json(*c.metadata) : json(nullptr);
  j["evidence"] = c.evidence;
  j["transcript_ref"] = c.transcript_ref ? json(*c.transcript_ref) : json(nullptr);
  j["draft"] = c.draft ? json(*c.draft) : json(nullptr);
  j["signature"] = c.signature ? json{{"full_name", c.signature->full_name}, {"timestamp", c.signature->timestamp}}
                               : json(nullptr);
  j["audit"] = c.audit;
  j["audit_head"] = c.audit_head;
  j["digest_algorithm"] = c.digest_algorithm;
}

void from_json(const json& j, CaseRecord& c) {
  c = CaseRecord{};
  c.case_id = j.at("case_id").get<std::string>();
  const auto state = parse_case_state(j.at("state").get<std::string>());
  if (!state) fail(ErrorKind::InvalidValue, "unknown case state");
  c.state = *state;
  if (!j.at("metadata").is_null()) c.metadata = j["metadata"].get<CaseMetadata>();
  c.evidence = j.at("evidence").get<std::vector<EvidenceRef>>();
  if (!j.at("transcript_ref").is_null()) c.transcript_ref = j["transcript_ref"].get<std::string>();
  if (!j.at("draft").is_null()) c.draft = j["draft"].get<DraftDocument>();
  if (!j.at("signature").is_null())
    c.signature = Signature{j["signature"].at("full_name").get<std::string>(), j["signature"].at("timestamp").get<std::string>()};
  c.audit = j.at("audit").get<std::vector<AuditEntry>>();
  c.audit_head = j.at("audit_head").get<std::string>();
  c.digest_algorithm = j.value("digest_algorithm", std::string("sha256"));
}

Action attach_action(const EvidenceRef& evidence, std::string actor, std::string timestamp) {
  return {ActionKind::Attach, std::move(actor), std::move(timestamp), json{{"evidence", evidence}}};
}

Action metadata_action(const CaseMetadata& metadata, std::string actor, std::string timestamp) {
  return {ActionKind::EnterMetadata, std::move(actor), std::move(timestamp), json{{"metadata", metadata}}};
}

Action generate_action(const DraftDocument& draft, const std::string& transcript_ref, std::string actor,
                       std::string timestamp, bool regenerate) {
  return {regenerate ? ActionKind::Regenerate : ActionKind::Generate, std::move(actor), std::move(timestamp),
          json{{"draft", draft}, {"transcript_ref", transcript_ref}}};
}

Action resolve_action(std::size_t placeholder_id, std::string text, std::string actor, std::string timestamp) {
  return {ActionKind::Resolve, std::move(actor), std::move(timestamp),
          json{{"placeholder_id", placeholder_id}, {"text", std::move(text)}}};
}

Action edit_action(SectionId section, std::string text, std::string actor, std::string timestamp) {
  return {ActionKind::Edit, std::move(actor), std::move(timestamp),
          json{{"section", to_string(section)}, {"text", std::move(text)}}};
}

Action sign_action(std::string full_name, std::string actor, std::string timestamp) {
  return {ActionKind::Sign, std::move(actor), std::move(timestamp), json{{"full_name", std::move(full_name)}}};
}

Action submit_action(std::string actor, std::string timestamp) {
  return {ActionKind::Submit, std::move(actor), std::move(timestamp), json::object()};
}

CaseRecord create_case(std::string case_id, std::string actor, std::string timestamp) {
  static const std::regex id_re(R"([A-Za-z0-9_-]{1,64})");
  if (!std::regex_match(case_id, id_re)) fail(ErrorKind::InvalidValue, "invalid case id");
  if (actor.empty()) fail(ErrorKind::InvalidValue, "actor is empty");
  CaseRecord r;
  r.case_id = case_id;
  append_entry(r, Action{ActionKind::Create, std::move(actor), std::move(timestamp), json{{"case_id", case_id}}});
  return r;
}

bool action_allowed(CaseState state, ActionKind kind) {
  switch (kind) {
    case ActionKind::Create: return false;
    case ActionKind::Attach: return state == CaseState::Created || state == CaseState::EvidenceAttached;
    case ActionKind::EnterMetadata: return state == CaseState::EvidenceAttached;
    case ActionKind::Generate: return state == CaseState::MetadataEntered;
    case ActionKind::Regenerate: return state == CaseState::DraftGenerated || state == CaseState::Editing;
    case ActionKind::Resolve: return state == CaseState::DraftGenerated || state == CaseState::Editing;
    case ActionKind::Edit:
      return state == CaseState::DraftGenerated || state == CaseState::Editing || state == CaseState::ReadyToSign;
    case ActionKind::Sign: return state == CaseState::ReadyToSign;
    case ActionKind::Submit: return state == CaseState::Signed;
  }
  return false;
}

bool valid_full_name(std::string_view name) {
  std::istringstream in{std::string(name)};
  std::string token;
  int n = 0;
  while (in >> token) ++n;
  return n >= 2;
}

CaseRecord transition(const CaseRecord& record, const Action& action) {
  if (action.actor.empty()) fail(ErrorKind::InvalidValue, "actor is empty");
  const auto state = record.state;
  const auto kind = action.kind;

  if (!action_allowed(state, kind)) {
    if (kind == ActionKind::Sign && record.draft && record.draft->unresolved_count() > 0) {
      const auto n = record.draft->unresolved_count();
      fail(ErrorKind::PlaceholdersUnresolved, std::to_string(n) + " placeholders unresolved", n);
    }
    if (kind == ActionKind::Submit && state == CaseState::ReadyToSign)
      fail(ErrorKind::SignatureMissing, "draft must be signed before submission");
    if (kind == ActionKind::Resolve && state == CaseState::ReadyToSign)
      fail(ErrorKind::UnknownPlaceholder, "every placeholder is already resolved");
    invalid(state, kind);
  }

  CaseRecord r = record;
  const auto& p = action.payload;
  try {
    switch (kind) {
      case ActionKind::Create: invalid(state, kind);
      case ActionKind::Attach: {
        auto ev = p.at("evidence").get<EvidenceRef>();
        if (ev.digest.empty()) fail(ErrorKind::InvalidValue, "evidence digest is empty");
        const bool known = std::any_of(r.evidence.begin(), r.evidence.end(),
                                       [&](const EvidenceRef& e) { return e.digest == ev.digest; });
        if (!known) r.evidence.push_back(std::move(ev));
        r.state = CaseState::EvidenceAttached;
        break;
      }
      case ActionKind::EnterMetadata:
        r.metadata = p.at("metadata").get<CaseMetadata>();
        r.state = CaseState::MetadataEntered;
        break;
      case ActionKind::Generate:
      case ActionKind::Regenerate:
        r.draft = fresh_draft(p);
        r.transcript_ref = p.at("transcript_ref").get<std::string>();
        r.state = CaseState::DraftGenerated;
        break;
      case ActionKind::Resolve:
        r.draft = with_resolution(*r.draft, p.at("placeholder_id").get<std::size_t>(), p.at("text").get<std::string>());
        settle_editing(r);
        break;
      case ActionKind::Edit: {
        const auto section = parse_section_id(p.at("section").get<std::string>());
        if (!section) fail(ErrorKind::InvalidValue, "unknown section " + p["section"].get<std::string>());
        r.draft = with_section_text(*r.draft, *section, p.at("text").get<std::string>());
        if (state != CaseState::ReadyToSign) settle_editing(r);
        break;
      }
      case ActionKind::Sign: {
        const auto name = trim(p.at("full_name").get<std::string>());
        if (!valid_full_name(name)) fail(ErrorKind::InvalidName, "full name needs at least two tokens");
        r.signature = Signature{name, action.timestamp};
        r.state = CaseState::Signed;
        break;
      }
      case ActionKind::Submit:
        r.state = CaseState::Submitted;
        break;
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidValue, std::string("malformed action payload: ") + e.what());
  }
  append_entry(r, action);
  return r;
}

bool verify_audit(const CaseRecord& record) {
  if (record.audit.empty()) return false;
  std::string prev(kGenesisDigest);
  for (std::size_t i = 0; i < record.audit.size(); ++i) {
    const auto& e = record.audit[i];
    if (e.seq != i || e.prev_digest != prev || e.payload_digest != sha256_hex(e.payload.dump())) return false;
    prev = entry_digest(e);
  }
  return prev == record.audit_head;
}

CaseRecord replay_case(const std::vector<AuditEntry>& entries) {
  if (entries.empty() || entries[0].action != to_string(ActionKind::Create))
    fail(ErrorKind::InvalidValue, "case log must start with a create entry");
  const auto& first = entries[0];
  CaseRecord r;
  try {
    r = create_case(first.payload.at("case_id").get<std::string>(), first.actor, first.timestamp);
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidValue, std::string("malformed create entry: ") + e.what());
  }
  if (!(r.audit.back() == first)) fail(ErrorKind::InvalidValue, "log entry 0 does not reproduce");
  for (std::size_t i = 1; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const auto kind = parse_action_kind(e.action);
    if (!kind) fail(ErrorKind::InvalidValue, "unknown action " + e.action);
    r = transition(r, Action{*kind, e.actor, e.timestamp, e.payload});
    if (!(r.audit.back() == e)) fail(ErrorKind::InvalidValue, "log entry " + std::to_string(i) + " does not reproduce");
  }
  return r;
}

std::string now_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

CaseLog::CaseLog(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) fail(ErrorKind::IoFailure, "cannot create case log directory " + root_.string());
}

std::filesystem::path CaseLog::path_for(const std::string& case_id) const { return root_ / (case_id + ".log"); }

void CaseLog::append(const std::string& case_id, const AuditEntry& entry) const {
  std::ofstream out(path_for(case_id), std::ios::binary | std::ios::app);
  out << json(entry).dump() << '\n';
  out.flush();
  if (!out) fail(ErrorKind::IoFailure, "cannot append to case log for " + case_id);
}

CaseRecord CaseLog::load(const std::string& case_id) const {
  const auto path = path_for(case_id);
  if (!std::filesystem::exists(path)) fail(ErrorKind::NotFound, "no case " + case_id);
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoFailure, "cannot read " + path.string());
  std::vector<AuditEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      entries.push_back(json::parse(line).get<AuditEntry>());
    } catch (const json::exception& e) {
      fail(ErrorKind::InvalidValue, "corrupt case log " + path.string() + ": " + e.what());
    }
  }
  return replay_case(entries);
}

std::vector<std::string> CaseLog::case_ids() const {
  std::vector<std::string> out;
  for (const auto& entry : std::filesystem::directory_iterator(root_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".log") out.push_back(entry.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace draftforge
