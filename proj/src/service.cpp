#include "draftforge/service.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "draftforge/codec.hpp"
#include "draftforge/digest.hpp"
#include "draftforge/error.hpp"
#include "draftforge/lexicon.hpp"

namespace draftforge {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path resolve_path(const json& j, const char* key, const fs::path& base, const fs::path& fallback = {}) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  fs::path p = j[key].get<std::string>();
  return p.is_relative() ? base / p : p;
}

BackendDescriptor descriptor_for(const json& backends, const char* name, ModelRole role) {
  if (!backends.contains(name)) return BackendDescriptor::baseline(role);
  json j = backends[name];
  if (!j.contains("role")) j["role"] = to_string(role);
  auto d = j.get<BackendDescriptor>();
  if (d.role != role) fail(ErrorKind::InvalidValue, std::string("backend ") + name + " has the wrong role");
  return d;
}

std::string temp_suffix() {
  static std::atomic<std::uint64_t> counter{0};
  std::random_device rd;
  std::ostringstream s;
  s << ".tmp." << std::hex << rd() << '.' << counter.fetch_add(1) << '.'
    << std::hash<std::thread::id>{}(std::this_thread::get_id());
  return s.str();
}

Transcript parse_any_transcript(std::string_view bytes, const std::string& id) {
  auto t = parse_transcript_payload(bytes, id);
  t.source = TranscriptSource::Asr;
  return t;
}

std::string evidence_transcript_id(const std::string& digest) { return "evidence-" + digest.substr(0, 16); }

DraftEngine make_engine(const ServiceConfig& config) {
  auto prompts = PromptAssets::load(config.asset_dir);
  auto preamble = prompts.draft;
  return DraftEngine(std::move(preamble), ModelAdapters(load_lexicons(config.asset_dir), std::move(prompts)));
}

std::unique_ptr<AsrClient> make_asr(const ServiceConfig& config, const EvidenceStore& store) {
  if (config.asr.kind == "remote") return std::make_unique<RemoteAsrClient>(store, config.asr);
  return std::make_unique<MockAsrClient>(store);
}

}  // namespace

void ServiceConfig::validate() const {
  if (storage_root.empty()) fail(ErrorKind::InvalidValue, "storage_root is required");
  if (export_dir.empty()) fail(ErrorKind::InvalidValue, "export_dir is required");
  if (listen_port < 0 || listen_port > 65535) fail(ErrorKind::InvalidValue, "listen port out of range");
  denoise.validate();
  extract.validate();
  draft.validate();
  if (denoise.role != ModelRole::Denoise || extract.role != ModelRole::Extract || draft.role != ModelRole::Draft)
    fail(ErrorKind::InvalidValue, "backend roles do not match their slots");
  if (asr.kind != "mock" && asr.kind != "remote") fail(ErrorKind::InvalidValue, "asr kind must be mock or remote");
  if (asr.kind == "remote" && (!asr.endpoint || asr.endpoint->empty()))
    fail(ErrorKind::InvalidValue, "remote asr requires an endpoint");
  for (const char* rel : {"lexicons/confusions.tsv", "lexicons/fillers.txt", "lexicons/interjections.txt",
                          "lexicons/commands.txt", "lexicons/conclusory.txt", "prompts/denoise.txt",
                          "prompts/extract.txt", "prompts/draft.txt"}) {
    if (!fs::is_regular_file(asset_dir / rel))
      fail(ErrorKind::InvalidValue, "missing asset " + (asset_dir / rel).string());
  }
}

ServiceConfig parse_service_config(const json& j, const fs::path& base_dir) {
  ServiceConfig c;
  try {
    if (j.contains("listen")) {
      c.listen_host = j["listen"].value("host", c.listen_host);
      c.listen_port = j["listen"].value("port", c.listen_port);
    }
    c.storage_root = resolve_path(j, "storage_root", base_dir);
    c.export_dir = resolve_path(j, "export_dir", base_dir);
    c.asset_dir = resolve_path(j, "asset_dir", base_dir, default_asset_dir());
    const json backends = j.value("backends", json::object());
    c.denoise = descriptor_for(backends, "denoise", ModelRole::Denoise);
    c.extract = descriptor_for(backends, "extract", ModelRole::Extract);
    c.draft = descriptor_for(backends, "draft", ModelRole::Draft);
    if (j.contains("asr")) {
      const auto& a = j["asr"];
      c.asr.kind = a.value("kind", c.asr.kind);
      if (a.contains("endpoint") && !a["endpoint"].is_null()) c.asr.endpoint = a["endpoint"].get<std::string>();
      c.asr.timeout_ms = a.value("timeout_ms", c.asr.timeout_ms);
      c.asr.max_retries = a.value("max_retries", c.asr.max_retries);
    }
    if (j.contains("api_token") && !j["api_token"].is_null()) c.api_token = j["api_token"].get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidValue, std::string("invalid service config: ") + e.what());
  }
  c.validate();
  return c;
}

ServiceConfig load_service_config(const fs::path& file) {
  const auto text = read_text_file(file);
  return parse_service_config(parse_json(text, ErrorKind::InvalidValue), fs::absolute(file).parent_path());
}

EvidenceStore::EvidenceStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_ / "objects", ec);
  fs::create_directories(root_ / "sidecars", ec);
  if (ec) fail(ErrorKind::IoFailure, "cannot create evidence store at " + root_.string());
}

fs::path EvidenceStore::object_path(const std::string& digest) const {
  if (digest.size() != 64 || digest.find_first_not_of("0123456789abcdef") != std::string::npos)
    fail(ErrorKind::NotFound, "malformed evidence digest");
  return root_ / "objects" / digest;
}

void EvidenceStore::write_atomic(const fs::path& path, std::string_view bytes) const {
  const fs::path tmp = path.string() + temp_suffix();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) fail(ErrorKind::IoFailure, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorKind::IoFailure, "cannot publish " + path.string());
  }
}

EvidenceRef EvidenceStore::put(std::string_view bytes, MediaKind kind) const {
  EvidenceRef ref;
  ref.digest = sha256_hex(bytes);
  ref.media_kind = kind;
  ref.byte_length = bytes.size();
  const auto path = object_path(ref.digest);
  if (!fs::exists(path)) write_atomic(path, bytes);
  ref.stored_at = path.string();
  return ref;
}

std::string EvidenceStore::get(const std::string& digest) const {
  const auto path = object_path(digest);
  if (!fs::exists(path)) fail(ErrorKind::NotFound, "no evidence object " + digest);
  return read_text_file(path);
}

bool EvidenceStore::contains(const std::string& digest) const {
  try {
    return fs::exists(object_path(digest));
  } catch (const Error&) {
    return false;
  }
}

void EvidenceStore::link_sidecar(const std::string& audio_digest, const std::string& sidecar_digest) const {
  object_path(audio_digest);
  object_path(sidecar_digest);
  write_atomic(root_ / "sidecars" / audio_digest, sidecar_digest);
}

std::optional<std::string> EvidenceStore::sidecar_for(const std::string& audio_digest) const {
  const auto path = root_ / "sidecars" / audio_digest;
  if (!fs::exists(path)) return std::nullopt;
  return trim(read_text_file(path));
}

Transcript MockAsrClient::transcribe(const EvidenceRef& audio) const {
  const auto sidecar = store_.sidecar_for(audio.digest);
  if (!sidecar) fail(ErrorKind::NoSidecar, "no transcript sidecar for evidence " + audio.digest);
  return parse_any_transcript(store_.get(*sidecar), evidence_transcript_id(audio.digest));
}

Transcript RemoteAsrClient::transcribe(const EvidenceRef& audio) const {
  HttpPostRequest request;
  request.url = config_.endpoint.value_or("");
  request.body = store_.get(audio.digest);
  request.content_type = "application/octet-stream";
  request.headers = auth_headers();
  request.timeout_ms = config_.timeout_ms;
  request.max_retries = config_.max_retries;
  const auto reply = post_with_retries(request);
  return parse_any_transcript(reply.body, evidence_transcript_id(audio.digest));
}

json rms_export(const CaseRecord& record) {
  if (record.state != CaseState::Submitted)
    fail(ErrorKind::InvalidState, "case " + record.case_id + " is not submitted");
  json evidence = json::array();
  for (const auto& e : record.evidence) {
    evidence.push_back({{"digest", e.digest}, {"media_kind", to_string(e.media_kind)}, {"byte_length", e.byte_length}});
  }
  json doc = {{"case_id", record.case_id},
              {"draft_id", record.draft->draft_id},
              {"report", render(*record.draft, RenderMode::Resolved)},
              {"metadata", *record.metadata},
              {"signature", {{"full_name", record.signature->full_name}, {"timestamp", record.signature->timestamp}}},
              {"transcript_ref", record.transcript_ref.value_or("")},
              {"evidence", evidence},
              {"audit_head", record.audit_head},
              {"audit_length", record.audit.size()},
              {"digest_algorithm", record.digest_algorithm},
              {"submitted_at", record.audit.back().timestamp}};
  doc["export_sha256"] = sha256_hex(doc.dump());
  return doc;
}

json case_view(const CaseRecord& record) {
  json j = record;
  j.erase("audit");
  j["audit_length"] = record.audit.size();
  j["unresolved_count"] = record.draft ? record.draft->unresolved_count() : 0;
  json allowed = json::array();
  for (auto k : {ActionKind::Attach, ActionKind::EnterMetadata, ActionKind::Generate, ActionKind::Regenerate,
                 ActionKind::Resolve, ActionKind::Edit, ActionKind::Sign, ActionKind::Submit}) {
    if (action_allowed(record.state, k)) allowed.push_back(to_string(k));
  }
  j["allowed_actions"] = allowed;
  return j;
}

ReviewService::ReviewService(ServiceConfig config)
    : config_((config.validate(), std::move(config))),
      store_(config_.storage_root / "evidence"),
      log_(config_.storage_root / "cases"),
      asr_(make_asr(config_, store_)),
      engine_(make_engine(config_)) {
  std::error_code ec;
  fs::create_directories(config_.export_dir, ec);
  if (ec) fail(ErrorKind::IoFailure, "cannot create export directory " + config_.export_dir.string());
  for (const auto& id : log_.case_ids()) {
    auto s = std::make_shared<Slot>();
    s->record = log_.load(id);
    cases_[id] = s;
    if (id.rfind("case-", 0) == 0) {
      try {
        next_case_number_ = std::max<std::uint64_t>(next_case_number_, std::stoull(id.substr(5)) + 1);
      } catch (const std::exception&) {
      }
    }
  }
}

std::shared_ptr<ReviewService::Slot> ReviewService::slot(const std::string& case_id) const {
  std::shared_lock lock(cases_mutex_);
  const auto it = cases_.find(case_id);
  if (it == cases_.end()) fail(ErrorKind::NotFound, "no case " + case_id);
  return it->second;
}

CaseRecord ReviewService::apply(Slot& s, const Action& action) {
  auto next = transition(s.record, action);
  log_.append(next.case_id, next.audit.back());
  s.record = next;
  return next;
}

CaseRecord ReviewService::create_case(const std::string& actor) {
  std::unique_lock lock(cases_mutex_);
  char id[32];
  std::snprintf(id, sizeof id, "case-%06llu", static_cast<unsigned long long>(next_case_number_));
  auto record = draftforge::create_case(id, actor, now_timestamp());
  log_.append(record.case_id, record.audit.back());
  ++next_case_number_;
  auto s = std::make_shared<Slot>();
  s->record = record;
  cases_[record.case_id] = s;
  return record;
}

CaseRecord ReviewService::attach_evidence(const std::string& case_id, const EvidenceUpload& upload,
                                          const std::string& actor) {
  auto s = slot(case_id);
  std::lock_guard lock(s->mutex);
  if (!action_allowed(s->record.state, ActionKind::Attach)) transition(s->record, Action{ActionKind::Attach, actor, "", {}});
  if (upload.audio.empty()) fail(ErrorKind::InvalidValue, "evidence upload is empty");
  if (upload.sidecar) {
    try {
      parse_any_transcript(*upload.sidecar, "sidecar");
    } catch (const Error&) {
      fail(ErrorKind::InvalidValue, "sidecar is not a jsonl or plain transcript");
    }
  }

  const auto audio = store_.put(upload.audio, MediaKind::Audio);
  auto record = apply(*s, attach_action(audio, actor, now_timestamp()));
  if (upload.sidecar) {
    const auto sidecar = store_.put(*upload.sidecar, MediaKind::TranscriptSidecar);
    store_.link_sidecar(audio.digest, sidecar.digest);
    record = apply(*s, attach_action(sidecar, actor, now_timestamp()));
  }
  return record;
}

CaseRecord ReviewService::enter_metadata(const std::string& case_id, const CaseMetadata& metadata,
                                         const std::string& actor) {
  auto s = slot(case_id);
  std::lock_guard lock(s->mutex);
  return apply(*s, metadata_action(metadata, actor, now_timestamp()));
}

Transcript ReviewService::drafting_transcript(const CaseRecord& record) const {
  const auto it = std::find_if(record.evidence.rbegin(), record.evidence.rend(),
                               [](const EvidenceRef& e) { return e.media_kind == MediaKind::Audio; });
  if (it == record.evidence.rend()) fail(ErrorKind::InvalidValue, "case has no audio evidence");
  const auto asr = asr_->transcribe(*it);
  return engine_.adapters().denoise(asr, config_.denoise);
}

CaseRecord ReviewService::generate(const std::string& case_id, bool regenerate, const std::string& actor) {
  auto s = slot(case_id);
  std::lock_guard lock(s->mutex);
  const auto kind = regenerate ? ActionKind::Regenerate : ActionKind::Generate;
  if (!action_allowed(s->record.state, kind)) transition(s->record, Action{kind, actor, "", {}});

  const auto transcript = drafting_transcript(s->record);
  const auto events = engine_.adapters().extract_events(transcript, config_.extract);
  const auto draft = engine_.generate_draft(transcript, events, config_.draft);
  store_.put(serialize_transcript(transcript, TranscriptFormat::Jsonl), MediaKind::TranscriptSidecar);
  const auto audio = std::find_if(s->record.evidence.rbegin(), s->record.evidence.rend(),
                                  [](const EvidenceRef& e) { return e.media_kind == MediaKind::Audio; });
  return apply(*s, generate_action(draft, audio->digest, actor, now_timestamp(), regenerate));
}

CaseRecord ReviewService::resolve_placeholder(const std::string& case_id, std::size_t placeholder_id,
                                              const std::string& text, const std::string& actor) {
  auto s = slot(case_id);
  std::lock_guard lock(s->mutex);
  return apply(*s, resolve_action(placeholder_id, text, actor, now_timestamp()));
}

CaseRecord ReviewService::edit_section(const std::string& case_id, SectionId section, const std::string& text,
                                       const std::string& actor) {
  auto s = slot(case_id);
  std::lock_guard lock(s->mutex);
  return apply(*s, edit_action(section, text, actor, now_timestamp()));
}

CaseRecord ReviewService::sign(const std::string& case_id, const std::string& full_name, const std::string& actor) {
  auto s = slot(case_id);
  std::lock_guard lock(s->mutex);
  return apply(*s, sign_action(full_name, actor, now_timestamp()));
}

SubmitResult ReviewService::submit(const std::string& case_id, const std::string& actor) {
  auto s = slot(case_id);
  std::lock_guard lock(s->mutex);
  const auto next = transition(s->record, submit_action(actor, now_timestamp()));
  const auto doc = rms_export(next);
  const auto path = config_.export_dir / (case_id + ".json");
  const auto bytes = doc.dump(2) + "\n";
  const fs::path tmp = path.string() + temp_suffix();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << bytes;
    out.flush();
    if (!out) fail(ErrorKind::IoFailure, "cannot write export " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::IoFailure, "cannot publish export " + path.string());
  log_.append(case_id, next.audit.back());
  s->record = next;
  return {next, path, doc.at("export_sha256").get<std::string>()};
}

CaseRecord ReviewService::get(const std::string& case_id) const {
  auto s = slot(case_id);
  std::lock_guard lock(s->mutex);
  return s->record;
}

std::vector<std::string> ReviewService::case_ids() const {
  std::shared_lock lock(cases_mutex_);
  std::vector<std::string> out;
  for (const auto& [id, s] : cases_) out.push_back(id);
  return out;
}

Transcript ReviewService::draft_transcript(const std::string& case_id) const {
  const auto record = get(case_id);
  if (!record.draft) fail(ErrorKind::NotFound, "case " + case_id + " has no draft");
  const auto bytes = store_.get(record.draft->transcript_digest);
  return parse_transcript(bytes, TranscriptFormat::Jsonl, evidence_transcript_id(record.transcript_ref.value_or(std::string(64, '0'))));
}

std::string ReviewService::draft_prompt(const std::string& case_id) const {
  const auto record = get(case_id);
  return engine_.assemble_prompt(drafting_transcript(record));
}

}  // namespace draftforge
