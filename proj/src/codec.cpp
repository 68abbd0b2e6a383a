#include "draftforge/codec.hpp"

#include "draftforge/error.hpp"

namespace draftforge {

namespace {

SpeakerRole role_from(const Json& j) {
  const auto role = parse_role(j.get<std::string>());
  if (!role) fail(ErrorKind::InvalidValue, "unknown role " + j.dump());
  return *role;
}

std::string optional_string(const Json& j, const char* key) {
  return j.contains(key) && !j[key].is_null() ? j[key].get<std::string>() : std::string{};
}

}  // namespace

void to_json(Json& j, const Utterance& u) {
  j = Json{{"index", u.index}, {"speaker", u.speaker_id}, {"role", role_token(u.role)}, {"text", u.text}};
  if (u.start_ms) j["start_ms"] = *u.start_ms;
  if (u.end_ms) j["end_ms"] = *u.end_ms;
}

void from_json(const Json& j, Utterance& u) {
  u.index = j.at("index").get<std::size_t>();
  u.speaker_id = j.at("speaker").get<std::string>();
  u.role = role_from(j.at("role"));
  u.text = j.at("text").get<std::string>();
  u.start_ms.reset();
  u.end_ms.reset();
  if (j.contains("start_ms") && !j["start_ms"].is_null()) u.start_ms = j["start_ms"].get<std::int64_t>();
  if (j.contains("end_ms") && !j["end_ms"].is_null()) u.end_ms = j["end_ms"].get<std::int64_t>();
}

void to_json(Json& j, const Transcript& t) {
  j = Json{{"transcript_id", t.transcript_id},
           {"source", t.source == TranscriptSource::Asr ? "asr" : "simulated"},
           {"utterances", t.utterances}};
}

void from_json(const Json& j, Transcript& t) {
  t.transcript_id = optional_string(j, "transcript_id");
  const auto source = j.contains("source") ? j["source"].get<std::string>() : std::string("asr");
  if (source != "asr" && source != "simulated") fail(ErrorKind::InvalidValue, "unknown source " + source);
  t.source = source == "asr" ? TranscriptSource::Asr : TranscriptSource::Simulated;
  t.utterances = j.at("utterances").get<std::vector<Utterance>>();
  validate_transcript(t);
}

void to_json(Json& j, const CaseMetadata& m) {
  j = Json{{"incident_type", m.incident_type},
           {"charge_severity", to_string(m.charge_severity)},
           {"officer_name", m.officer_name},
           {"case_number", m.case_number}};
}

void from_json(const Json& j, CaseMetadata& m) {
  m.incident_type = optional_string(j, "incident_type");
  const auto severity = parse_charge_severity(optional_string(j, "charge_severity"));
  if (!severity) fail(ErrorKind::InvalidValue, "unknown charge_severity");
  m.charge_severity = *severity;
  m.officer_name = optional_string(j, "officer_name");
  m.case_number = optional_string(j, "case_number");
}

void to_json(Json& j, const EventActor& a) {
  j = Json{{"role", role_token(a.role)}, {"descriptor", a.descriptor}};
}

void from_json(const Json& j, EventActor& a) {
  a.role = role_from(j.at("role"));
  a.descriptor = optional_string(j, "descriptor");
}

void to_json(Json& j, const EventAction& a) {
  j = Json{{"actor", a.actor},
           {"verb_phrase", a.verb_phrase},
           {"object", a.object},
           {"time_hint", a.time_hint},
           {"location_hint", a.location_hint}};
}

void from_json(const Json& j, EventAction& a) {
  a.actor = j.at("actor").get<std::size_t>();
  a.verb_phrase = j.at("verb_phrase").get<std::string>();
  a.object = optional_string(j, "object");
  a.time_hint = optional_string(j, "time_hint");
  a.location_hint = optional_string(j, "location_hint");
}

void to_json(Json& j, const EventRecord& e) {
  j = Json{{"record_id", e.record_id},
           {"offense_label", e.offense_label},
           {"actors", e.actors},
           {"actions", e.actions},
           {"location", e.location},
           {"outcome_fields", e.outcome_fields}};
}

void from_json(const Json& j, EventRecord& e) {
  e.record_id = optional_string(j, "record_id");
  e.offense_label = j.at("offense_label").get<std::string>();
  e.actors = j.at("actors").get<std::vector<EventActor>>();
  e.actions = j.at("actions").get<std::vector<EventAction>>();
  e.location = optional_string(j, "location");
  e.outcome_fields = j.contains("outcome_fields") ? j["outcome_fields"].get<std::vector<std::string>>()
                                                  : std::vector<std::string>{};
  validate_event(e);
}

Json parse_json(std::string_view text, ErrorKind on_error) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    fail(on_error, e.what());
  }
}

}  // namespace draftforge
