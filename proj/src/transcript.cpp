#include "draftforge/transcript.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <json.hpp>

#include "draftforge/error.hpp"

namespace draftforge {

namespace {

using nlohmann::json;

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Length of a Unicode whitespace sequence starting at text[pos], 0 if none.
std::size_t unicode_space_len(std::string_view text, std::size_t pos) {
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
  if (is_ascii_space(text[pos])) return 1;
  const std::size_t rest = text.size() - pos;
  if (rest >= 2 && byte(pos) == 0xC2 && (byte(pos + 1) == 0x85 || byte(pos + 1) == 0xA0)) return 2;
  if (rest >= 3) {
    const unsigned b0 = byte(pos), b1 = byte(pos + 1), b2 = byte(pos + 2);
    if (b0 == 0xE1 && b1 == 0x9A && b2 == 0x80) return 3;                // U+1680
    if (b0 == 0xE2 && b1 == 0x80 && (b2 <= 0x8A || b2 == 0xA8 || b2 == 0xA9 || b2 == 0xAF))
      return 3;                                                           // U+2000..200A, 2028, 2029, 202F
    if (b0 == 0xE2 && b1 == 0x81 && b2 == 0x9F) return 3;                // U+205F
    if (b0 == 0xE3 && b1 == 0x80 && b2 == 0x80) return 3;                // U+3000
  }
  return 0;
}

std::vector<std::string_view> split_unicode_whitespace(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0, start = 0;
  bool in_token = false;
  while (i < text.size()) {
    const std::size_t space = unicode_space_len(text, i);
    if (space > 0) {
      if (in_token) out.push_back(text.substr(start, i - start));
      in_token = false;
      i += space;
    } else {
      if (!in_token) start = i;
      in_token = true;
      ++i;
    }
  }
  if (in_token) out.push_back(text.substr(start));
  return out;
}

std::vector<std::string_view> split_lines(std::string_view raw) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= raw.size()) {
    const auto nl = raw.find('\n', start);
    auto line = raw.substr(start, nl == std::string_view::npos ? raw.size() - start : nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return is_ascii_space(c); });
}

Utterance parse_plain_line(std::string_view line, std::size_t line_no, std::size_t index) {
  const auto sp = line.find(' ');
  if (sp == std::string_view::npos) fail(ErrorKind::MalformedLine, "missing speaker", line_no);
  const auto role = parse_role(line.substr(0, sp));
  if (!role) fail(ErrorKind::MalformedLine, "unknown role", line_no);
  const auto rest = line.substr(sp + 1);
  const auto colon = rest.find(": ");
  if (colon == std::string_view::npos || colon == 0)
    fail(ErrorKind::MalformedLine, "missing ':' separator", line_no);
  const auto speaker = rest.substr(0, colon);
  if (speaker.find(' ') != std::string_view::npos)
    fail(ErrorKind::MalformedLine, "speaker id contains a space", line_no);
  Utterance u;
  u.index = index;
  u.speaker_id = std::string(speaker);
  u.role = *role;
  u.text = trim(rest.substr(colon + 2));
  if (u.text.empty()) fail(ErrorKind::MalformedLine, "empty text", line_no);
  return u;
}

Utterance parse_jsonl_line(std::string_view line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception&) {
    fail(ErrorKind::MalformedLine, "invalid JSON", line_no);
  }
  try {
    if (!j.is_object()) fail(ErrorKind::MalformedLine, "expected an object", line_no);
    Utterance u;
    const auto idx = j.at("index").get<std::int64_t>();
    if (idx < 0) fail(ErrorKind::MalformedLine, "negative index", line_no);
    u.index = static_cast<std::size_t>(idx);
    u.speaker_id = j.at("speaker").get<std::string>();
    const auto role = parse_role(j.at("role").get<std::string>());
    if (!role) fail(ErrorKind::MalformedLine, "unknown role", line_no);
    u.role = *role;
    u.text = trim(j.at("text").get<std::string>());
    if (j.contains("start_ms") && !j["start_ms"].is_null()) u.start_ms = j["start_ms"].get<std::int64_t>();
    if (j.contains("end_ms") && !j["end_ms"].is_null()) u.end_ms = j["end_ms"].get<std::int64_t>();
    if (u.text.empty() || u.speaker_id.empty()) fail(ErrorKind::MalformedLine, "empty field", line_no);
    if (u.text.find_first_of("\r\n") != std::string::npos)
      fail(ErrorKind::MalformedLine, "line break in text", line_no);
    if (u.start_ms && u.end_ms && *u.start_ms > *u.end_ms)
      fail(ErrorKind::MalformedLine, "start_ms after end_ms", line_no);
    return u;
  } catch (const json::exception&) {
    fail(ErrorKind::MalformedLine, "missing or mistyped key", line_no);
  }
}

}  // namespace

std::string_view role_token(SpeakerRole role) {
  switch (role) {
    case SpeakerRole::Officer: return "OFFICER";
    case SpeakerRole::Suspect: return "SUSPECT";
    case SpeakerRole::Witness: return "WITNESS";
    case SpeakerRole::Victim: return "VICTIM";
    case SpeakerRole::PersonOfInterest: return "POI";
    case SpeakerRole::Dispatch: return "DISPATCH";
    case SpeakerRole::Unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

std::optional<SpeakerRole> parse_role(std::string_view token) {
  const auto t = to_lower_ascii(token);
  if (t == "officer") return SpeakerRole::Officer;
  if (t == "suspect") return SpeakerRole::Suspect;
  if (t == "witness") return SpeakerRole::Witness;
  if (t == "victim") return SpeakerRole::Victim;
  if (t == "poi" || t == "person_of_interest" || t == "personofinterest") return SpeakerRole::PersonOfInterest;
  if (t == "dispatch") return SpeakerRole::Dispatch;
  if (t == "unknown") return SpeakerRole::Unknown;
  return std::nullopt;
}

std::string_view to_string(ChargeSeverity severity) {
  switch (severity) {
    case ChargeSeverity::Misdemeanor: return "misdemeanor";
    case ChargeSeverity::Felony: return "felony";
    case ChargeSeverity::Unspecified: return "unspecified";
  }
  return "unspecified";
}

std::optional<ChargeSeverity> parse_charge_severity(std::string_view text) {
  const auto t = to_lower_ascii(text);
  if (t == "misdemeanor") return ChargeSeverity::Misdemeanor;
  if (t == "felony") return ChargeSeverity::Felony;
  if (t == "unspecified" || t.empty()) return ChargeSeverity::Unspecified;
  return std::nullopt;
}

void validate_event(const EventRecord& event) {
  if (event.actors.empty()) fail(ErrorKind::InvalidValue, "event " + event.record_id + " has no actors");
  if (event.actions.empty()) fail(ErrorKind::InvalidValue, "event " + event.record_id + " has no actions");
  for (const auto& action : event.actions) {
    if (action.actor >= event.actors.size())
      fail(ErrorKind::InvalidValue, "event " + event.record_id + " action actor does not resolve");
  }
}

void validate_utterance(const Utterance& u) {
  if (u.text.empty()) fail(ErrorKind::InvalidValue, "utterance text is empty");
  if (u.text != trim(u.text)) fail(ErrorKind::InvalidValue, "utterance text has surrounding whitespace");
  if (u.text.find_first_of("\r\n") != std::string::npos)
    fail(ErrorKind::InvalidValue, "utterance text contains a line break");
  if (u.speaker_id.empty() || u.speaker_id.find_first_of(" :\t") != std::string::npos)
    fail(ErrorKind::InvalidValue, "invalid speaker id '" + u.speaker_id + "'");
  if (u.start_ms && u.end_ms && *u.start_ms > *u.end_ms)
    fail(ErrorKind::InvalidValue, "utterance start_ms after end_ms");
}

void validate_transcript(const Transcript& t) {
  for (std::size_t i = 0; i < t.utterances.size(); ++i) {
    if (t.utterances[i].index != i) fail(ErrorKind::InvalidValue, "utterance indices are not dense");
    validate_utterance(t.utterances[i]);
  }
}

Transcript parse_transcript(std::string_view raw, TranscriptFormat format, std::string transcript_id,
                            TranscriptSource source) {
  Transcript t;
  t.transcript_id = std::move(transcript_id);
  t.source = source;
  std::vector<std::size_t> line_of;
  const auto lines = split_lines(raw);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (is_blank(lines[i])) continue;
    const std::size_t line_no = i + 1;
    if (format == TranscriptFormat::Plain) {
      t.utterances.push_back(parse_plain_line(lines[i], line_no, t.utterances.size()));
    } else {
      t.utterances.push_back(parse_jsonl_line(lines[i], line_no));
    }
    line_of.push_back(line_no);
  }
  if (t.utterances.empty()) fail(ErrorKind::EmptyTranscript, "no utterances");
  if (format == TranscriptFormat::Jsonl) {
    std::vector<std::size_t> order(t.utterances.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return t.utterances[a].index < t.utterances[b].index;
    });
    std::vector<Utterance> sorted;
    sorted.reserve(order.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const auto& u = t.utterances[order[pos]];
      if (pos > 0 && sorted.back().index == u.index)
        fail(ErrorKind::DuplicateIndex, "index " + std::to_string(u.index) + " repeated", line_of[order[pos]]);
      if (u.index != pos)
        fail(ErrorKind::MalformedLine, "index gap at " + std::to_string(pos), line_of[order[pos]]);
      sorted.push_back(u);
    }
    t.utterances = std::move(sorted);
  }
  return t;
}

std::string serialize_transcript(const Transcript& t, TranscriptFormat format) {
  std::string out;
  for (const auto& u : t.utterances) {
    if (format == TranscriptFormat::Plain) {
      out += role_token(u.role);
      out += ' ';
      out += u.speaker_id;
      out += ": ";
      out += u.text;
    } else {
      nlohmann::ordered_json j;
      j["index"] = u.index;
      j["speaker"] = u.speaker_id;
      j["role"] = role_token(u.role);
      j["text"] = u.text;
      if (u.start_ms) j["start_ms"] = *u.start_ms;
      if (u.end_ms) j["end_ms"] = *u.end_ms;
      out += j.dump();
    }
    out += '\n';
  }
  return out;
}

std::vector<std::string> wer_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  for (auto piece : split_unicode_whitespace(text)) {
    while (!piece.empty() && (piece.back() == '.' || piece.back() == ',' || piece.back() == '?' ||
                              piece.back() == '!')) {
      piece.remove_suffix(1);
    }
    if (!piece.empty()) tokens.push_back(to_lower_ascii(piece));
  }
  return tokens;
}

std::size_t token_edit_distance(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  std::vector<std::size_t> prev(ref.size() + 1), cur(ref.size() + 1);
  for (std::size_t j = 0; j <= ref.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= hyp.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= ref.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[ref.size()];
}

double word_error_rate(std::string_view hypothesis, std::string_view reference) {
  const auto ref = wer_tokens(reference);
  if (ref.empty()) fail(ErrorKind::EmptyReference, "reference has no tokens");
  const auto hyp = wer_tokens(hypothesis);
  return static_cast<double>(token_edit_distance(hyp, ref)) / static_cast<double>(ref.size());
}

double speaker_attribution_error_rate(const Transcript& hypothesis, const Transcript& reference) {
  if (hypothesis.size() != reference.size())
    fail(ErrorKind::LengthMismatch, std::to_string(hypothesis.size()) + " vs " + std::to_string(reference.size()));
  if (reference.empty()) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    if (hypothesis.utterances[i].speaker_id != reference.utterances[i].speaker_id) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(reference.size());
}

std::string concatenated_text(const Transcript& transcript) {
  std::string out;
  for (const auto& u : transcript.utterances) {
    if (!out.empty()) out += ' ';
    out += u.text;
  }
  return out;
}

std::string trim(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && is_ascii_space(text[b])) ++b;
  while (e > b && is_ascii_space(text[e - 1])) --e;
  return std::string(text.substr(b, e - b));
}

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace draftforge
