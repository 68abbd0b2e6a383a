#include "draftforge/backends.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <map>
#include <regex>
#include <set>
#include <thread>

#include <httplib.h>

#include "draftforge/codec.hpp"
#include "draftforge/dialogue.hpp"
#include "draftforge/error.hpp"

namespace draftforge {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  static const std::regex re(R"(^(http://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) fail(ErrorKind::InvalidValue, "unsupported endpoint URL " + url);
  return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

std::int64_t elapsed_ms(Clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - since).count();
}

}  // namespace

std::string_view to_string(ModelRole role) {
  switch (role) {
    case ModelRole::Denoise: return "denoise";
    case ModelRole::Extract: return "extract";
    case ModelRole::Draft: return "draft";
  }
  return "draft";
}

std::string_view to_string(BackendKind kind) { return kind == BackendKind::Baseline ? "baseline" : "remote"; }

void BackendDescriptor::validate() const {
  if (kind == BackendKind::Remote && (!endpoint || endpoint->empty()))
    fail(ErrorKind::InvalidValue, "remote backend requires an endpoint");
  if (timeout_ms <= 0) fail(ErrorKind::InvalidValue, "timeout_ms must be positive");
  if (max_retries < 0) fail(ErrorKind::InvalidValue, "max_retries must be non-negative");
  if (initial_backoff_ms < 0) fail(ErrorKind::InvalidValue, "initial_backoff_ms must be non-negative");
}

BackendDescriptor BackendDescriptor::baseline(ModelRole role) {
  BackendDescriptor d;
  d.role = role;
  d.kind = BackendKind::Baseline;
  return d;
}

BackendDescriptor BackendDescriptor::remote(ModelRole role, std::string endpoint, std::string model_name) {
  BackendDescriptor d;
  d.role = role;
  d.kind = BackendKind::Remote;
  d.endpoint = std::move(endpoint);
  d.model_name = std::move(model_name);
  return d;
}

void to_json(json& j, const BackendDescriptor& d) {
  j = json{{"role", to_string(d.role)},
           {"kind", to_string(d.kind)},
           {"timeout_ms", d.timeout_ms},
           {"max_retries", d.max_retries},
           {"initial_backoff_ms", d.initial_backoff_ms}};
  j["endpoint"] = d.endpoint ? json(*d.endpoint) : json(nullptr);
  j["model_name"] = d.model_name ? json(*d.model_name) : json(nullptr);
}

void from_json(const json& j, BackendDescriptor& d) {
  const auto role = j.at("role").get<std::string>();
  if (role == "denoise") d.role = ModelRole::Denoise;
  else if (role == "extract") d.role = ModelRole::Extract;
  else if (role == "draft") d.role = ModelRole::Draft;
  else fail(ErrorKind::InvalidValue, "unknown backend role " + role);
  const auto kind = j.value("kind", std::string("baseline"));
  if (kind != "baseline" && kind != "remote") fail(ErrorKind::InvalidValue, "unknown backend kind " + kind);
  d.kind = kind == "baseline" ? BackendKind::Baseline : BackendKind::Remote;
  d.endpoint = j.contains("endpoint") && !j["endpoint"].is_null() ? std::optional(j["endpoint"].get<std::string>())
                                                                  : std::nullopt;
  d.model_name = j.contains("model_name") && !j["model_name"].is_null()
                     ? std::optional(j["model_name"].get<std::string>())
                     : std::nullopt;
  d.timeout_ms = j.value("timeout_ms", std::int64_t{30000});
  d.max_retries = j.value("max_retries", 2);
  d.initial_backoff_ms = j.value("initial_backoff_ms", std::int64_t{200});
  d.validate();
}

HttpPostResult post_with_retries(const HttpPostRequest& request) {
  if (request.timeout_ms <= 0) fail(ErrorKind::InvalidValue, "timeout_ms must be positive");
  const auto url = split_url(request.url);
  httplib::Headers headers(request.headers.begin(), request.headers.end());

  std::int64_t backoff = request.initial_backoff_ms;
  bool last_timed_out = false;
  std::string last_error;
  const int attempts = request.max_retries + 1;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    httplib::Client client(url.origin);
    const auto secs = static_cast<time_t>(request.timeout_ms / 1000);
    const auto usecs = static_cast<time_t>((request.timeout_ms % 1000) * 1000);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    const auto attempt_start = Clock::now();
    auto res = client.Post(url.path, headers, request.body, request.content_type);
    if (res && res->status >= 200 && res->status < 300) return {res->body, attempt};
    if (res && res->status < 500)
      fail(ErrorKind::BackendUnavailable, "backend rejected request with HTTP " + std::to_string(res->status));
    last_timed_out = !res && (res.error() == httplib::Error::ConnectionTimeout ||
                              (res.error() == httplib::Error::Read && elapsed_ms(attempt_start) >= request.timeout_ms));
    last_error = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
    if (attempt < attempts && backoff > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff *= 2;
    }
  }
  if (last_timed_out)
    fail(ErrorKind::TimeoutExceeded, "backend timed out after " + std::to_string(attempts) + " attempts");
  fail(ErrorKind::BackendUnavailable, "backend failed after " + std::to_string(attempts) + " attempts: " + last_error);
}

std::map<std::string, std::string> auth_headers() {
  std::map<std::string, std::string> headers;
  if (const char* token = std::getenv(kModelTokenEnv); token != nullptr && *token != '\0')
    headers.emplace("Authorization", std::string("Bearer ") + token);
  return headers;
}

BackendResult call_remote(const BackendDescriptor& backend, const std::string& prompt) {
  if (backend.kind != BackendKind::Remote) fail(ErrorKind::InvalidValue, "call_remote needs a remote backend");
  backend.validate();
  const json body = {{"model", backend.model_name.value_or("default")},
                     {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
                     {"temperature", 0}};
  HttpPostRequest request;
  request.url = *backend.endpoint;
  request.body = body.dump();
  request.content_type = "application/json";
  request.headers = auth_headers();
  request.timeout_ms = backend.timeout_ms;
  request.max_retries = backend.max_retries;
  request.initial_backoff_ms = backend.initial_backoff_ms;

  const auto started = Clock::now();
  const auto reply = post_with_retries(request);
  BackendResult result;
  try {
    result.payload = json::parse(reply.body).at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorKind::MalformedBackendOutput, std::string("unexpected completion body: ") + e.what());
  }
  result.latency_ms = elapsed_ms(started);
  result.backend = backend;
  result.attempt_count = reply.attempt_count;
  return result;
}

PromptAssets PromptAssets::load(const std::filesystem::path& asset_dir) {
  const auto dir = asset_dir / "prompts";
  return PromptAssets{read_text_file(dir / "denoise.txt"), read_text_file(dir / "extract.txt"),
                      read_text_file(dir / "draft.txt")};
}

ModelAdapters::ModelAdapters(LexiconSet lexicons, PromptAssets prompts)
    : lexicons_(std::move(lexicons)), prompts_(std::move(prompts)) {}

Transcript baseline_denoise(const Transcript& noisy, const LexiconSet& lexicons) {
  const std::set<std::string> interjections(lexicons.interjections.begin(), lexicons.interjections.end());
  Transcript out;
  out.transcript_id = noisy.transcript_id;
  out.source = noisy.source;
  for (const auto& u : noisy.utterances) {
    if (u.role == SpeakerRole::Unknown && interjections.count(trim(u.text)) > 0) continue;
    out.utterances.push_back(u);
  }

  std::map<std::string, std::size_t> officer_counts;
  for (const auto& u : out.utterances) {
    if (u.role == SpeakerRole::Officer) ++officer_counts[u.speaker_id];
  }
  std::string officer = "OFFICER";
  std::size_t best = 0;
  for (const auto& [speaker, count] : officer_counts) {
    if (count > best) {
      best = count;
      officer = speaker;
    }
  }

  for (auto& u : out.utterances) {
    if (u.role != SpeakerRole::Suspect && u.role != SpeakerRole::Witness) continue;
    const bool command = std::any_of(lexicons.commands.begin(), lexicons.commands.end(),
                                     [&](const std::string& phrase) { return contains_phrase(u.text, phrase); });
    if (command) {
      u.role = SpeakerRole::Officer;
      u.speaker_id = officer;
    }
  }
  for (std::size_t i = 0; i < out.utterances.size(); ++i) out.utterances[i].index = i;
  return out;
}

Transcript parse_transcript_payload(std::string_view payload, const std::string& transcript_id) {
  for (auto format : {TranscriptFormat::Jsonl, TranscriptFormat::Plain}) {
    try {
      auto t = parse_transcript(payload, format, transcript_id);
      validate_transcript(t);
      return t;
    } catch (const Error&) {
    }
  }
  fail(ErrorKind::MalformedBackendOutput, "payload is not a transcript");
}

Transcript ModelAdapters::denoise(const Transcript& noisy, const BackendDescriptor& backend) const {
  if (backend.role != ModelRole::Denoise) fail(ErrorKind::InvalidValue, "backend role is not denoise");
  if (backend.kind == BackendKind::Baseline) return baseline_denoise(noisy, lexicons_);
  const auto result = call_remote(backend, prompts_.denoise + serialize_transcript(noisy, TranscriptFormat::Plain));
  auto t = parse_transcript_payload(result.payload, noisy.transcript_id);
  t.source = noisy.source;
  return t;
}

std::vector<EventRecord> ModelAdapters::extract_events(const Transcript& clean, const BackendDescriptor& backend) const {
  if (backend.role != ModelRole::Extract) fail(ErrorKind::InvalidValue, "backend role is not extract");
  if (backend.kind == BackendKind::Baseline) {
    std::vector<EventRecord> events;
    for (auto& parsed : parse_template_dialogues(clean)) events.push_back(std::move(parsed.event));
    return events;
  }
  const auto result = call_remote(backend, prompts_.extract + serialize_transcript(clean, TranscriptFormat::Plain));
  try {
    auto j = json::parse(result.payload);
    if (j.is_object() && j.contains("events")) j = j["events"];
    if (!j.is_array()) fail(ErrorKind::MalformedBackendOutput, "expected a JSON array of events");
    std::vector<EventRecord> events;
    for (std::size_t k = 0; k < j.size(); ++k) {
      auto e = j[k].get<EventRecord>();
      if (e.record_id.empty()) e.record_id = clean.transcript_id + "#" + std::to_string(k);
      events.push_back(std::move(e));
    }
    return events;
  } catch (const json::exception& e) {
    fail(ErrorKind::MalformedBackendOutput, e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::MalformedBackendOutput) throw;
    fail(ErrorKind::MalformedBackendOutput, e.what());
  }
}

}  // namespace draftforge
