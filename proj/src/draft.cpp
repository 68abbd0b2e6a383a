#include "draftforge/draft.hpp"

#include <algorithm>
#include <regex>
#include <set>
#include <sstream>

#include "draftforge/codec.hpp"
#include "draftforge/dialogue.hpp"
#include "draftforge/digest.hpp"
#include "draftforge/error.hpp"

namespace draftforge {

namespace {

using nlohmann::json;

std::string capitalized(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out += '\n';
    out += lines[i];
  }
  return out;
}

std::vector<std::size_t> utterances_with(const Transcript& t, std::string_view phrase) {
  std::vector<std::size_t> out;
  if (phrase.empty()) return out;
  for (const auto& u : t.utterances) {
    if (contains_phrase(u.text, phrase)) out.push_back(u.index);
  }
  return out;
}

std::optional<std::string> first_match(const Transcript& t, const std::regex& re, int group) {
  for (const auto& u : t.utterances) {
    std::smatch m;
    if (std::regex_search(u.text, m, re)) return m[group].str();
  }
  return std::nullopt;
}

std::string section_heading(SectionId id) { return "## " + std::string(to_string(id)) + "\n"; }

// Byte offset of each section's text within render(draft, Raw).
std::vector<std::size_t> section_offsets(const DraftDocument& draft) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < draft.sections.size(); ++i) {
    if (i > 0) pos += 1;
    pos += section_heading(draft.sections[i].id).size();
    out.push_back(pos);
    pos += draft.sections[i].text.size() + 1;
  }
  return out;
}

std::size_t section_position(SectionId id) { return static_cast<std::size_t>(id); }

void finalize(DraftDocument& d, const Transcript& transcript) {
  d.placeholders = collect_placeholders(d.sections);
  d.transcript_digest = sha256_hex(serialize_transcript(transcript, TranscriptFormat::Jsonl));
  d.draft_id = "draft-" + sha256_hex(render(d) + "\n" + d.backend_used).substr(0, 16);
}

}  // namespace

std::string_view to_string(SectionId id) {
  switch (id) {
    case SectionId::Header: return "header";
    case SectionId::Narrative: return "narrative";
    case SectionId::Persons: return "persons";
    case SectionId::EvidenceActions: return "evidence_actions";
  }
  return "header";
}

std::optional<SectionId> parse_section_id(std::string_view text) {
  for (auto id : kSectionOrder) {
    if (to_string(id) == text) return id;
  }
  return std::nullopt;
}

std::vector<ScannedPlaceholder> scan_placeholders(std::string_view text) {
  std::vector<ScannedPlaceholder> out;
  std::size_t pos = 0;
  while ((pos = text.find(kPlaceholderOpener, pos)) != std::string_view::npos) {
    if (text.substr(pos, kPlaceholderOpen.size()) != kPlaceholderOpen)
      fail(ErrorKind::MalformedPlaceholder, "placeholder opener at " + std::to_string(pos) + " lacks a space");
    const std::size_t hint_begin = pos + kPlaceholderOpen.size();
    const std::size_t close = text.find(kPlaceholderClose, hint_begin);
    if (close == std::string_view::npos)
      fail(ErrorKind::MalformedPlaceholder, "unclosed placeholder at " + std::to_string(pos));
    const auto hint = text.substr(hint_begin, close - hint_begin);
    if (hint.find("[[") != std::string_view::npos)
      fail(ErrorKind::MalformedPlaceholder, "nested placeholder at " + std::to_string(pos));
    if (trim(hint).empty()) fail(ErrorKind::MalformedPlaceholder, "empty placeholder hint at " + std::to_string(pos));
    const std::size_t end = close + kPlaceholderClose.size();
    out.push_back({std::string(hint), {pos, end}});
    pos = end;
  }
  return out;
}

std::string placeholder_text(std::string_view hint) {
  if (trim(hint).empty() || hint.find("[[") != std::string_view::npos || hint.find("]]") != std::string_view::npos)
    fail(ErrorKind::InvalidValue, "invalid placeholder hint");
  return std::string(kPlaceholderOpen) + std::string(hint) + std::string(kPlaceholderClose);
}

const std::string& DraftDocument::text(SectionId id) const {
  for (const auto& s : sections) {
    if (s.id == id) return s.text;
  }
  fail(ErrorKind::InvalidValue, "draft has no section " + std::string(to_string(id)));
}

std::size_t DraftDocument::unresolved_count() const {
  return static_cast<std::size_t>(
      std::count_if(placeholders.begin(), placeholders.end(), [](const Placeholder& p) { return !p.resolved_text; }));
}

std::vector<TextRange> section_sentences(std::string_view text) {
  std::vector<TextRange> out;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    if (end > begin) out.push_back({begin, end});
    begin = end + 1;
  }
  return out;
}

std::vector<Placeholder> collect_placeholders(const std::vector<Section>& sections) {
  std::vector<Placeholder> out;
  for (const auto& s : sections) {
    for (auto& found : scan_placeholders(s.text)) {
      Placeholder p;
      p.placeholder_id = out.size();
      p.hint = std::move(found.hint);
      p.section = s.id;
      p.offset = found.range.begin;
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::string render(const DraftDocument& draft, RenderMode mode) {
  std::string out;
  for (std::size_t i = 0; i < draft.sections.size(); ++i) {
    const auto& s = draft.sections[i];
    if (i > 0) out += '\n';
    out += section_heading(s.id);
    if (mode == RenderMode::Raw) {
      out += s.text;
    } else {
      std::size_t cursor = 0;
      for (const auto& p : draft.placeholders) {
        if (p.section != s.id) continue;
        const std::size_t len = placeholder_text(p.hint).size();
        out.append(s.text, cursor, p.offset - cursor);
        out += p.resolved_text ? *p.resolved_text : s.text.substr(p.offset, len);
        cursor = p.offset + len;
      }
      out.append(s.text, cursor, std::string::npos);
    }
    out += '\n';
  }
  return out;
}

TextRange rendered_span(const DraftDocument& draft, const Placeholder& placeholder) {
  const auto offsets = section_offsets(draft);
  for (std::size_t i = 0; i < draft.sections.size(); ++i) {
    if (draft.sections[i].id != placeholder.section) continue;
    const std::size_t begin = offsets[i] + placeholder.offset;
    return {begin, begin + placeholder_text(placeholder.hint).size()};
  }
  fail(ErrorKind::InvalidValue, "placeholder section missing from draft");
}

std::vector<Highlight> compute_highlights(const std::vector<Section>& sections,
                                          const std::vector<ProvenanceLink>& provenance) {
  std::vector<Highlight> out;
  for (const auto& s : sections) {
    const auto sentences = section_sentences(s.text);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      const auto r = sentences[i];
      const auto line = std::string_view(s.text).substr(r.begin, r.end - r.begin);
      bool flag = line.find(kPlaceholderOpener) != std::string_view::npos;
      if (!flag && s.id == SectionId::Narrative) {
        flag = std::none_of(provenance.begin(), provenance.end(), [&](const ProvenanceLink& l) {
          return l.section == SectionId::Narrative && l.sentence_index == i;
        });
      }
      if (flag) out.push_back({s.id, r});
    }
  }
  return out;
}

DraftDocument with_section_text(const DraftDocument& draft, SectionId section, std::string text) {
  if (text.find('\r') != std::string::npos) fail(ErrorKind::InvalidValue, "section text contains a carriage return");
  DraftDocument d = draft;
  auto it = std::find_if(d.sections.begin(), d.sections.end(), [&](const Section& s) { return s.id == section; });
  if (it == d.sections.end()) fail(ErrorKind::InvalidValue, "draft has no section " + std::string(to_string(section)));
  const std::string old_text = it->text;
  it->text = std::move(text);

  auto fresh = collect_placeholders(d.sections);
  std::vector<std::string> old_hints;
  std::vector<std::string> new_hints;
  for (const auto& p : draft.placeholders) {
    if (p.section == section) old_hints.push_back(p.hint);
  }
  for (const auto& p : fresh) {
    if (p.section == section) new_hints.push_back(p.hint);
  }
  if (old_hints != new_hints)
    fail(ErrorKind::InvalidValue, "edit must keep the section's placeholders in order");
  for (std::size_t i = 0; i < fresh.size(); ++i) fresh[i].resolved_text = draft.placeholders[i].resolved_text;
  d.placeholders = std::move(fresh);

  if (section == SectionId::Narrative) {
    const auto line_at = [](const std::string& t, std::size_t idx) -> std::optional<std::string_view> {
      const auto sentences = section_sentences(t);
      if (idx >= sentences.size()) return std::nullopt;
      return std::string_view(t).substr(sentences[idx].begin, sentences[idx].end - sentences[idx].begin);
    };
    std::vector<ProvenanceLink> kept;
    for (const auto& l : d.provenance) {
      if (l.section != SectionId::Narrative) {
        kept.push_back(l);
        continue;
      }
      const auto before = line_at(old_text, l.sentence_index);
      const auto after = line_at(it->text, l.sentence_index);
      if (before && after && *before == *after) kept.push_back(l);
    }
    d.provenance = std::move(kept);
  }
  d.highlights = compute_highlights(d.sections, d.provenance);
  d.edited = true;
  return d;
}

DraftDocument with_resolution(const DraftDocument& draft, std::size_t placeholder_id, std::string_view text) {
  if (placeholder_id >= draft.placeholders.size())
    fail(ErrorKind::UnknownPlaceholder, "no placeholder " + std::to_string(placeholder_id));
  if (draft.placeholders[placeholder_id].resolved_text)
    fail(ErrorKind::UnknownPlaceholder, "placeholder " + std::to_string(placeholder_id) + " is already resolved");
  auto value = trim(text);
  if (value.empty()) fail(ErrorKind::EmptyResolution, "resolution text is empty");
  if (value.find('\n') != std::string::npos || value.find('\r') != std::string::npos ||
      value.find("[[") != std::string::npos || value.find("]]") != std::string::npos)
    fail(ErrorKind::InvalidValue, "resolution text may not contain line breaks or placeholder delimiters");
  DraftDocument d = draft;
  d.placeholders[placeholder_id].resolved_text = std::move(value);
  return d;
}

void validate_draft(const DraftDocument& draft, const Transcript& transcript) {
  const auto bad = [](const std::string& msg) { fail(ErrorKind::InvalidValue, "invalid draft: " + msg); };
  if (draft.sections.size() != std::size(kSectionOrder)) bad("expected four sections");
  for (std::size_t i = 0; i < draft.sections.size(); ++i) {
    if (draft.sections[i].id != kSectionOrder[i]) bad("sections out of order");
  }
  if (draft.transcript_digest != sha256_hex(serialize_transcript(transcript, TranscriptFormat::Jsonl)))
    bad("transcript digest mismatch");

  const auto expected = collect_placeholders(draft.sections);
  if (expected.size() != draft.placeholders.size()) bad("placeholder count mismatch");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& p = draft.placeholders[i];
    if (p.placeholder_id != i || p.hint != expected[i].hint || p.section != expected[i].section ||
        p.offset != expected[i].offset)
      bad("placeholder " + std::to_string(i) + " does not match its delimiter occurrence");
    if (p.resolved_text) {
      const auto& r = *p.resolved_text;
      if (trim(r).empty() || r.find("[[") != std::string::npos || r.find("]]") != std::string::npos)
        bad("placeholder " + std::to_string(i) + " has an invalid resolution");
    }
  }

  std::set<std::size_t> indices;
  for (const auto& u : transcript.utterances) indices.insert(u.index);
  for (const auto& link : draft.provenance) {
    if (link.utterance_indices.empty()) bad("empty provenance link");
    for (auto idx : link.utterance_indices) {
      if (indices.count(idx) == 0) bad("provenance references missing utterance " + std::to_string(idx));
    }
    if (link.sentence_index >= section_sentences(draft.text(link.section)).size())
      bad("provenance references missing sentence");
  }
  for (const auto& h : draft.highlights) {
    if (h.range.begin > h.range.end || h.range.end > draft.text(h.section).size()) bad("highlight out of range");
  }

  if (draft.backend_used == kBaselineDrafterName && !draft.edited) {
    const auto& narrative = draft.text(SectionId::Narrative);
    const auto sentences = section_sentences(narrative);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      const auto line = std::string_view(narrative).substr(sentences[i].begin, sentences[i].end - sentences[i].begin);
      if (line.find(kPlaceholderOpener) != std::string_view::npos) continue;
      const bool linked = std::any_of(draft.provenance.begin(), draft.provenance.end(), [&](const ProvenanceLink& l) {
        return l.section == SectionId::Narrative && l.sentence_index == i;
      });
      if (!linked) bad("narrative sentence " + std::to_string(i) + " lacks provenance");
    }
  }
}

std::vector<Violation> conclusory_guard(const DraftDocument& draft, const Transcript& transcript,
                                        const std::vector<std::string>& lexicon) {
  std::vector<Violation> out;
  for (const auto& term : lexicon) {
    if (trim(term).empty()) continue;
    const bool spoken = std::any_of(transcript.utterances.begin(), transcript.utterances.end(),
                                    [&](const Utterance& u) { return contains_phrase(u.text, term); });
    if (spoken) continue;
    for (const auto& s : draft.sections) {
      for (auto offset : find_phrase(s.text, term)) out.push_back({term, s.id, offset});
    }
    for (const auto& p : draft.placeholders) {
      if (p.resolved_text && contains_phrase(*p.resolved_text, term)) out.push_back({term, p.section, p.offset});
    }
  }
  std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
    return std::tie(a.section, a.offset, a.term) < std::tie(b.section, b.offset, b.term);
  });
  return out;
}

DraftDocument baseline_draft(const Transcript& transcript, const std::vector<EventRecord>& events) {
  if (transcript.utterances.empty()) fail(ErrorKind::EmptyTranscript, "cannot draft from an empty transcript");

  static const std::regex name_re(R"(\bOfficer ([A-Z][a-z'-]+ [A-Z][a-z'-]+))");
  static const std::regex badge_re(R"(\bbadge(?: number)?(?: is)?:? #?(\d{2,6})\b)", std::regex::icase);
  static const std::regex time_re(R"(\b(\d{1,2}:\d{2} ?[AaPp]\.?[Mm]\.?))");

  std::optional<std::string> location;
  std::optional<std::string> time;
  for (const auto& e : events) {
    if (!location && !e.location.empty()) location = e.location;
    for (const auto& a : e.actions) {
      if (!time && !a.time_hint.empty()) time = a.time_hint;
    }
  }
  if (!time) time = first_match(transcript, time_re, 1);
  const auto name = first_match(transcript, name_re, 1);
  const auto badge = first_match(transcript, badge_re, 1);
  const auto field = [](const std::optional<std::string>& v, std::string_view hint) {
    return v ? *v : placeholder_text(hint);
  };

  DraftDocument d;
  d.backend_used = std::string(kBaselineDrafterName);
  d.sections.push_back({SectionId::Header, join_lines({
                                               "Reporting officer: " + field(name, "reporting officer name"),
                                               "Badge number: " + field(badge, "badge number"),
                                               "Incident location: " + field(location, "incident location"),
                                               "Date and time: " + field(time, "date and time of incident"),
                                           })});

  std::vector<std::string> narrative;
  const auto add_sentence = [&](std::string sentence, std::vector<std::size_t> support) {
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    if (support.empty()) {
      sentence += " " + placeholder_text("confirm against the recording");
    } else {
      d.provenance.push_back({SectionId::Narrative, narrative.size(), std::move(support)});
    }
    narrative.push_back(std::move(sentence));
  };
  for (const auto& e : events) {
    auto opening = utterances_with(transcript, "report of " + e.offense_label);
    if (opening.empty()) opening = utterances_with(transcript, e.offense_label);
    add_sentence("Officers responded to a report of " + e.offense_label + " at " + e.location + ".", opening);

    const auto labels = actor_labels(e.actors);
    for (const auto& a : e.actions) {
      std::string sentence = capitalized(a.actor < labels.size() ? labels[a.actor] : "a person") + " " + a.verb_phrase;
      auto support = utterances_with(transcript, a.verb_phrase);
      if (!a.time_hint.empty()) sentence += " at about " + a.time_hint;
      if (!a.location_hint.empty()) sentence += ", at " + a.location_hint;
      sentence += ".";
      if (!support.empty()) {
        for (const auto* hint : {&a.time_hint, &a.location_hint}) {
          if (!hint->empty()) {
            for (auto idx : utterances_with(transcript, *hint)) support.push_back(idx);
          }
        }
      }
      add_sentence(std::move(sentence), std::move(support));
    }
  }
  if (narrative.empty()) narrative.push_back(placeholder_text("narrative of the incident"));
  d.sections.push_back({SectionId::Narrative, join_lines(narrative)});

  std::vector<std::string> persons;
  std::set<std::pair<SpeakerRole, std::string>> seen;
  for (const auto& e : events) {
    for (const auto& actor : e.actors) {
      if (!seen.insert({actor.role, actor.descriptor}).second) continue;
      persons.push_back(capitalized(std::string(role_word(actor.role))) + ": " +
                        (actor.descriptor.empty() ? std::string("no description given") : actor.descriptor));
    }
  }
  if (persons.empty()) persons.push_back(placeholder_text("persons involved"));
  d.sections.push_back({SectionId::Persons, join_lines(persons)});

  std::vector<std::string> objects;
  for (const auto& e : events) {
    for (const auto& a : e.actions) {
      if (!a.object.empty() && std::find(objects.begin(), objects.end(), a.object) == objects.end())
        objects.push_back(a.object);
    }
  }
  std::vector<std::string> evidence;
  if (objects.empty()) {
    evidence.push_back("No items were identified in the transcript.");
  } else {
    for (const auto& o : objects) evidence.push_back("Item involved: " + o + ".");
  }
  d.sections.push_back({SectionId::EvidenceActions, join_lines(evidence)});

  d.highlights = compute_highlights(d.sections, d.provenance);
  finalize(d, transcript);
  return d;
}

DraftDocument parse_draft_payload(std::string_view payload, const Transcript& transcript, std::string backend_used) {
  std::vector<std::optional<std::vector<std::string>>> bodies(std::size(kSectionOrder));
  std::optional<SectionId> current;
  std::istringstream in{std::string(payload)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("## ", 0) == 0) {
      const auto id = parse_section_id(trim(line.substr(3)));
      if (!id) fail(ErrorKind::MalformedBackendOutput, "unknown draft section: " + line);
      auto& body = bodies[section_position(*id)];
      if (body) fail(ErrorKind::MalformedBackendOutput, "duplicate draft section: " + line);
      body.emplace();
      current = id;
      continue;
    }
    if (!current) {
      if (trim(line).empty()) continue;
      fail(ErrorKind::MalformedBackendOutput, "text before the first draft section");
    }
    bodies[section_position(*current)]->push_back(line);
  }

  DraftDocument d;
  d.backend_used = std::move(backend_used);
  for (auto id : kSectionOrder) {
    auto& body = bodies[section_position(id)];
    if (!body) fail(ErrorKind::MalformedBackendOutput, "draft section missing: " + std::string(to_string(id)));
    std::vector<std::string> lines;
    for (auto& l : *body) {
      auto t = trim(l);
      if (!t.empty()) lines.push_back(std::move(t));
    }
    d.sections.push_back({id, join_lines(lines)});
  }
  try {
    collect_placeholders(d.sections);
  } catch (const Error& e) {
    fail(ErrorKind::MalformedBackendOutput, e.what());
  }

  d.highlights = compute_highlights(d.sections, d.provenance);
  finalize(d, transcript);
  return d;
}

DraftEngine::DraftEngine(std::string preamble, ModelAdapters adapters)
    : preamble_(std::move(preamble)), adapters_(std::move(adapters)) {
  if (!preamble_.empty() && preamble_.back() != '\n') preamble_ += '\n';
}

std::string DraftEngine::assemble_prompt(const Transcript& transcript) const {
  if (transcript.utterances.empty()) fail(ErrorKind::EmptyTranscript, "cannot prompt with an empty transcript");
  return preamble_ + serialize_transcript(transcript, TranscriptFormat::Plain);
}

DraftDocument DraftEngine::generate_draft(const Transcript& transcript, const std::vector<EventRecord>& events,
                                          const BackendDescriptor& backend) const {
  if (transcript.utterances.empty()) fail(ErrorKind::EmptyTranscript, "cannot draft from an empty transcript");
  if (backend.role != ModelRole::Draft) fail(ErrorKind::InvalidValue, "backend role is not draft");
  if (backend.kind == BackendKind::Baseline) return baseline_draft(transcript, events);
  const auto result = call_remote(backend, assemble_prompt(transcript));
  return parse_draft_payload(result.payload, transcript, "remote:" + backend.model_name.value_or("default"));
}

void to_json(json& j, const DraftDocument& d) {
  j = json::object();
  j["draft_id"] = d.draft_id;
  j["backend_used"] = d.backend_used;
  j["transcript_digest"] = d.transcript_digest;
  j["sections"] = json::array();
  for (const auto& s : d.sections) j["sections"].push_back({{"id", to_string(s.id)}, {"text", s.text}});
  j["placeholders"] = json::array();
  for (const auto& p : d.placeholders) {
    j["placeholders"].push_back({{"placeholder_id", p.placeholder_id},
                                 {"hint", p.hint},
                                 {"resolved_text", p.resolved_text ? json(*p.resolved_text) : json(nullptr)},
                                 {"section", to_string(p.section)},
                                 {"offset", p.offset}});
  }
  j["provenance"] = json::array();
  for (const auto& l : d.provenance) {
    j["provenance"].push_back({{"section", to_string(l.section)},
                               {"sentence_index", l.sentence_index},
                               {"utterance_indices", l.utterance_indices}});
  }
  j["edited"] = d.edited;
  j["highlights"] = json::array();
  for (const auto& h : d.highlights) {
    j["highlights"].push_back({{"section", to_string(h.section)}, {"begin", h.range.begin}, {"end", h.range.end}});
  }
}

void from_json(const json& j, DraftDocument& d) {
  const auto section = [](const json& v) {
    const auto id = parse_section_id(v.get<std::string>());
    if (!id) fail(ErrorKind::InvalidValue, "unknown section id " + v.get<std::string>());
    return *id;
  };
  d = DraftDocument{};
  d.draft_id = j.at("draft_id").get<std::string>();
  d.backend_used = j.at("backend_used").get<std::string>();
  d.transcript_digest = j.value("transcript_digest", std::string());
  d.edited = j.value("edited", false);
  for (const auto& s : j.at("sections")) d.sections.push_back({section(s.at("id")), s.at("text").get<std::string>()});
  for (const auto& p : j.at("placeholders")) {
    Placeholder ph;
    ph.placeholder_id = p.at("placeholder_id").get<std::size_t>();
    ph.hint = p.at("hint").get<std::string>();
    if (p.contains("resolved_text") && !p["resolved_text"].is_null()) ph.resolved_text = p["resolved_text"].get<std::string>();
    ph.section = section(p.at("section"));
    ph.offset = p.at("offset").get<std::size_t>();
    d.placeholders.push_back(std::move(ph));
  }
  for (const auto& l : j.at("provenance")) {
    d.provenance.push_back({section(l.at("section")), l.at("sentence_index").get<std::size_t>(),
                            l.at("utterance_indices").get<std::vector<std::size_t>>()});
  }
  for (const auto& h : j.at("highlights")) {
    d.highlights.push_back({section(h.at("section")), {h.at("begin").get<std::size_t>(), h.at("end").get<std::size_t>()}});
  }
}

}  // namespace draftforge
