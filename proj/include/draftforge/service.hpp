#pragma once

// draftforge/service.hpp — Evidence store, ASR clients, the review service
// (workflow + persistence + per-case locking) and records-management export.
// The HTTP surface over ReviewService lives in http_api.hpp.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "draftforge/backends.hpp"
#include "draftforge/draft.hpp"
#include "draftforge/workflow.hpp"

namespace draftforge {

struct AsrConfig {
  std::string kind = "mock";  // "mock" | "remote"
  std::optional<std::string> endpoint;
  std::int64_t timeout_ms = 30000;
  int max_retries = 1;
};

struct ServiceConfig {
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;  // 0 picks a free port
  std::filesystem::path storage_root;
  std::filesystem::path export_dir;
  std::filesystem::path asset_dir;
  BackendDescriptor denoise = BackendDescriptor::baseline(ModelRole::Denoise);
  BackendDescriptor extract = BackendDescriptor::baseline(ModelRole::Extract);
  BackendDescriptor draft = BackendDescriptor::baseline(ModelRole::Draft);
  AsrConfig asr;
  std::optional<std::string> api_token;  // required as a bearer token when set

  // Throws InvalidValue for bad descriptors or missing asset files.
  void validate() const;
};

// Relative paths resolve against base_dir.
ServiceConfig parse_service_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
ServiceConfig load_service_config(const std::filesystem::path& file);

// Content-addressed blobs at <root>/objects/<digest>; writes go to a temp file
// then rename, so readers never see partial objects. Sidecar links map an
// audio digest to its transcript digest at <root>/sidecars/<audio digest>.
class EvidenceStore {
 public:
  explicit EvidenceStore(std::filesystem::path root);

  EvidenceRef put(std::string_view bytes, MediaKind kind) const;
  // Throws NotFound.
  std::string get(const std::string& digest) const;
  bool contains(const std::string& digest) const;
  void link_sidecar(const std::string& audio_digest, const std::string& sidecar_digest) const;
  std::optional<std::string> sidecar_for(const std::string& audio_digest) const;

 private:
  std::filesystem::path object_path(const std::string& digest) const;
  void write_atomic(const std::filesystem::path& path, std::string_view bytes) const;
  std::filesystem::path root_;
};

class AsrClient {
 public:
  virtual ~AsrClient() = default;
  // Throws NoSidecar, BackendUnavailable, TimeoutExceeded, MalformedBackendOutput.
  virtual Transcript transcribe(const EvidenceRef& audio) const = 0;
};

// Returns the transcript stored as the audio's sidecar (jsonl or plain).
class MockAsrClient : public AsrClient {
 public:
  explicit MockAsrClient(const EvidenceStore& store) : store_(store) {}
  Transcript transcribe(const EvidenceRef& audio) const override;

 private:
  const EvidenceStore& store_;
};

// POSTs the audio bytes as application/octet-stream; the response body is a
// jsonl transcript.
class RemoteAsrClient : public AsrClient {
 public:
  RemoteAsrClient(const EvidenceStore& store, AsrConfig config) : store_(store), config_(std::move(config)) {}
  Transcript transcribe(const EvidenceRef& audio) const override;

 private:
  const EvidenceStore& store_;
  AsrConfig config_;
};

// Structured records-management export of a submitted case. Deterministic in
// the record. Throws InvalidState unless the case is Submitted.
nlohmann::json rms_export(const CaseRecord& record);

struct EvidenceUpload {
  std::string audio;
  std::optional<std::string> sidecar;
};

struct SubmitResult {
  CaseRecord record;
  std::filesystem::path export_path;
  std::string export_sha256;
};

// Serializes mutations per case; reads take a snapshot under the same lock.
// State is the fold of the per-case event logs, reloaded on construction.
class ReviewService {
 public:
  explicit ReviewService(ServiceConfig config);

  CaseRecord create_case(const std::string& actor);
  // Throws NotFound, InvalidTransition, InvalidValue (sidecar that does not parse).
  CaseRecord attach_evidence(const std::string& case_id, const EvidenceUpload& upload, const std::string& actor);
  CaseRecord enter_metadata(const std::string& case_id, const CaseMetadata& metadata, const std::string& actor);
  // ASR on the latest audio evidence, then denoise, extract, draft.
  CaseRecord generate(const std::string& case_id, bool regenerate, const std::string& actor);
  CaseRecord resolve_placeholder(const std::string& case_id, std::size_t placeholder_id, const std::string& text,
                                 const std::string& actor);
  CaseRecord edit_section(const std::string& case_id, SectionId section, const std::string& text,
                          const std::string& actor);
  CaseRecord sign(const std::string& case_id, const std::string& full_name, const std::string& actor);
  SubmitResult submit(const std::string& case_id, const std::string& actor);

  CaseRecord get(const std::string& case_id) const;
  std::vector<std::string> case_ids() const;
  // The transcript the current draft was generated from. Throws NotFound.
  Transcript draft_transcript(const std::string& case_id) const;
  // Exact prompt the drafter sees for the case's current evidence.
  std::string draft_prompt(const std::string& case_id) const;

  const ServiceConfig& config() const noexcept { return config_; }
  const EvidenceStore& store() const noexcept { return store_; }

 private:
  struct Slot {
    mutable std::mutex mutex;
    CaseRecord record;
  };

  std::shared_ptr<Slot> slot(const std::string& case_id) const;
  CaseRecord apply(Slot& slot, const Action& action);
  Transcript drafting_transcript(const CaseRecord& record) const;

  ServiceConfig config_;
  EvidenceStore store_;
  CaseLog log_;
  std::unique_ptr<AsrClient> asr_;
  DraftEngine engine_;
  mutable std::shared_mutex cases_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> cases_;
  std::uint64_t next_case_number_ = 1;
};

// Case view for API clients: the record without its audit list, plus
// audit_length, unresolved_count and the actions the state accepts.
nlohmann::json case_view(const CaseRecord& record);

}  // namespace draftforge
