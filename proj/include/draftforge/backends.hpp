#pragma once

// draftforge/backends.hpp — Model roles (denoise, extract, draft) behind one
// descriptor type. Baselines are pure and offline; remote backends speak a
// chat-completion style protocol:
//
//   POST <endpoint>  {"model": ..., "messages": [{"role": "user", "content": ...}], "temperature": 0}
//   200              {"choices": [{"message": {"content": "<payload>"}}]}
//
// A bearer token is sent when DRAFTFORGE_MODEL_TOKEN is set.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "draftforge/lexicon.hpp"
#include "draftforge/transcript.hpp"

namespace draftforge {

enum class ModelRole { Denoise, Extract, Draft };
enum class BackendKind { Baseline, Remote };

std::string_view to_string(ModelRole role);
std::string_view to_string(BackendKind kind);

inline constexpr const char* kModelTokenEnv = "DRAFTFORGE_MODEL_TOKEN";

struct BackendDescriptor {
  ModelRole role = ModelRole::Draft;
  BackendKind kind = BackendKind::Baseline;
  std::optional<std::string> endpoint;
  std::optional<std::string> model_name;
  std::int64_t timeout_ms = 30000;
  int max_retries = 2;
  std::int64_t initial_backoff_ms = 200;  // doubled after each failed attempt

  // Throws InvalidValue: remote without endpoint, timeout_ms <= 0, negative retries.
  void validate() const;

  static BackendDescriptor baseline(ModelRole role);
  static BackendDescriptor remote(ModelRole role, std::string endpoint, std::string model_name = "default");
};

void to_json(nlohmann::json& j, const BackendDescriptor& d);
void from_json(const nlohmann::json& j, BackendDescriptor& d);

struct BackendResult {
  std::string payload;
  std::int64_t latency_ms = 0;
  BackendDescriptor backend;
  int attempt_count = 0;
};

struct HttpPostRequest {
  std::string url;  // http://host[:port]/path
  std::string body;
  std::string content_type;
  std::map<std::string, std::string> headers;
  std::int64_t timeout_ms = 30000;
  int max_retries = 0;
  std::int64_t initial_backoff_ms = 200;
};

struct HttpPostResult {
  std::string body;
  int attempt_count = 0;
};

// POST with retries on transport failure and 5xx, backoff doubling after each
// failed attempt. A 4xx response fails at once with BackendUnavailable. Throws
// TimeoutExceeded when the last attempt timed out, BackendUnavailable otherwise.
HttpPostResult post_with_retries(const HttpPostRequest& request);

// Authorization header from DRAFTFORGE_MODEL_TOKEN, if set.
std::map<std::string, std::string> auth_headers();

// Sends one prompt; transport failures and 5xx responses are retried with
// exponential backoff up to max_retries. Throws TimeoutExceeded when the last
// attempt timed out, BackendUnavailable otherwise, MalformedBackendOutput when
// a 2xx body lacks choices[0].message.content.
BackendResult call_remote(const BackendDescriptor& backend, const std::string& prompt);

// Instruction preambles for remote denoise/extract/draft calls, read from
// prompts/{denoise,extract,draft}.txt under the asset directory.
struct PromptAssets {
  std::string denoise;
  std::string extract;
  std::string draft;

  static PromptAssets load(const std::filesystem::path& asset_dir);
};

class ModelAdapters {
 public:
  ModelAdapters(LexiconSet lexicons, PromptAssets prompts);

  // Baseline: drops Unknown-role utterances whose text is an interjection
  // lexicon entry, then reassigns Suspect/Witness utterances containing
  // command phrasing to the transcript's majority officer speaker. Token text
  // is never modified. Remote: payload parsed as a transcript (jsonl or plain).
  Transcript denoise(const Transcript& noisy, const BackendDescriptor& backend) const;

  // Baseline: inverse of the dialogue template grammar. Remote: payload
  // parsed as a JSON array of event records.
  std::vector<EventRecord> extract_events(const Transcript& clean, const BackendDescriptor& backend) const;

  const LexiconSet& lexicons() const noexcept { return lexicons_; }
  const PromptAssets& prompts() const noexcept { return prompts_; }

 private:
  LexiconSet lexicons_;
  PromptAssets prompts_;
};

Transcript baseline_denoise(const Transcript& noisy, const LexiconSet& lexicons);

// Parses a remote payload as a transcript, trying jsonl first, then plain.
// Throws MalformedBackendOutput.
Transcript parse_transcript_payload(std::string_view payload, const std::string& transcript_id);

}  // namespace draftforge
