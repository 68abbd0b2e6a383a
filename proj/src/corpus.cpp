#include "draftforge/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include "draftforge/codec.hpp"
#include "draftforge/dialogue.hpp"
#include "draftforge/error.hpp"
#include "draftforge/lexicon.hpp"
#include "draftforge/prng.hpp"

namespace draftforge {

namespace {

using nlohmann::json;

const std::vector<std::string> kDeterminers = {"a",   "an",   "the",     "his",  "her",   "their", "its",
                                               "two", "three", "several", "some", "another", "one"};
const std::vector<std::string> kPrepositions = {
    "from", "into", "to",     "at",      "on",      "in",      "with",   "toward", "towards", "through", "off",
    "out",  "onto", "inside", "under",   "over",    "behind",  "near",   "across", "against", "by",     "down",
    "up",   "past", "around", "outside", "between", "without", "before", "after",  "while",   "and",    "because"};

bool contains(const std::vector<std::string>& list, const std::string& word) {
  return std::find(list.begin(), list.end(), word) != list.end();
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) {
    auto t = trim(part);
    if (!t.empty()) parts.push_back(std::move(t));
  }
  return parts;
}

// Sentences end at '.' followed by whitespace or end of text; the period is dropped.
std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '.' && (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])))) {
      auto s = trim(text.substr(start, i - start));
      if (!s.empty()) out.push_back(std::move(s));
      start = i + 1;
    }
  }
  auto tail = trim(text.substr(std::min(start, text.size())));
  if (!tail.empty()) out.push_back(std::move(tail));
  return out;
}

std::optional<SpeakerRole> party_role(const std::string& word) {
  const auto w = to_lower_ascii(word);
  if (w == "suspect" || w == "defendant") return SpeakerRole::Suspect;
  if (w == "victim" || w == "complainant") return SpeakerRole::Victim;
  if (w == "witness") return SpeakerRole::Witness;
  if (w == "officer") return SpeakerRole::Officer;
  if (w == "person of interest") return SpeakerRole::PersonOfInterest;
  if (w == "dispatcher") return SpeakerRole::Dispatch;
  return std::nullopt;
}

const std::regex& action_sentence_re() {
  static const std::regex re = [] {
    std::string verbs;
    for (const auto& v : action_verb_table()) verbs += (verbs.empty() ? "" : "|") + v;
    return std::regex("^The (?:(second|third|fourth|fifth|sixth|seventh|eighth|ninth|tenth) )?"
                      "(officer|suspect|witness|victim|person of interest|dispatcher) "
                      "((?:" + verbs + ")\\b.*)$");
  }();
  return re;
}

const std::regex& clause_re() {
  static const std::regex re(
      R"(^(.+?)(?: at about (\d{1,2}:\d{2} [AP]M))?(?:, (?:in|at|near|inside|outside|behind|by) (.+))?$)");
  return re;
}

std::size_t ordinal_of(const std::string& word) {
  static const std::vector<std::string> ordinals = {"",      "second",  "third",  "fourth", "fifth",
                                                    "sixth", "seventh", "eighth", "ninth",  "tenth"};
  const auto it = std::find(ordinals.begin(), ordinals.end(), word);
  return it == ordinals.end() ? 0 : static_cast<std::size_t>(it - ordinals.begin());
}

std::string object_of(const std::string& predicate) {
  const auto words = split(predicate, ' ');
  if (words.size() < 2 || !contains(kDeterminers, to_lower_ascii(words[1]))) return {};
  std::string object;
  for (std::size_t i = 1; i < words.size(); ++i) {
    if (i > 1 && contains(kPrepositions, to_lower_ascii(words[i]))) break;
    if (!object.empty()) object += ' ';
    object += words[i];
  }
  return object;
}

struct CountBlock {
  std::string number;
  std::string label;
  std::string location;
  std::vector<std::string> facts;
  std::vector<std::string> outcomes;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoFailure, "cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) fail(ErrorKind::IoFailure, "write failed for " + path.string());
}

}  // namespace

void to_json(json& j, const CaseLawRecord& r) {
  j = json{{"case_id", r.case_id},
           {"jurisdiction", r.jurisdiction},
           {"year", r.year},
           {"category_tags", r.category_tags},
           {"body_text", r.body_text}};
}

void from_json(const json& j, CaseLawRecord& r) {
  r.case_id = j.at("case_id").get<std::string>();
  r.jurisdiction = j.value("jurisdiction", std::string{});
  r.year = j.value("year", 0);
  r.category_tags = j.value("category_tags", std::set<std::string>{});
  r.body_text = j.at("body_text").get<std::string>();
}

std::vector<CaseLawRecord> parse_case_law(std::string_view jsonl) {
  std::vector<CaseLawRecord> out;
  std::set<std::string> ids;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    CaseLawRecord r;
    try {
      r = json::parse(line).get<CaseLawRecord>();
    } catch (const json::exception&) {
      fail(ErrorKind::MalformedLine, "invalid case-law record", line_no);
    }
    if (trim(r.body_text).empty()) fail(ErrorKind::InvalidValue, "case " + r.case_id + " has an empty body");
    if (!ids.insert(r.case_id).second) fail(ErrorKind::InvalidValue, "duplicate case id " + r.case_id);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CaseLawRecord> load_case_law_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  if (ec) fail(ErrorKind::IoFailure, "cannot list " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<CaseLawRecord> all;
  std::set<std::string> ids;
  for (const auto& f : files) {
    for (auto& r : parse_case_law(read_text_file(f))) {
      if (!ids.insert(r.case_id).second) fail(ErrorKind::InvalidValue, "duplicate case id " + r.case_id);
      all.push_back(std::move(r));
    }
  }
  return all;
}

TagPredicate has_tag(std::string tag) {
  return [tag = std::move(tag)](const std::set<std::string>& tags) { return tags.count(tag) > 0; };
}

void CorpusManifest::validate() const {
  if (crawled && *crawled < criminal) fail(ErrorKind::InvalidValue, "manifest: criminal exceeds crawled");
  if (criminal < sampled) fail(ErrorKind::InvalidValue, "manifest: sampled exceeds criminal");
  if (sampled < police_related) fail(ErrorKind::InvalidValue, "manifest: police_related exceeds sampled");
  if (dialogues > events) fail(ErrorKind::InvalidValue, "manifest: dialogues exceed events");
}

void to_json(json& j, const CorpusManifest& m) {
  j = json{{"counts",
            {{"crawled", m.crawled ? json(*m.crawled) : json(nullptr)},
             {"criminal", m.criminal},
             {"sampled", m.sampled},
             {"police_related", m.police_related},
             {"derived_events", m.derived_events},
             {"no_event_cases", m.no_event_cases},
             {"events", m.events},
             {"dialogues", m.dialogues},
             {"pairs", m.pairs}}},
           {"seeds", m.seeds},
           {"prng_algorithm_name", m.prng_algorithm_name},
           {"generator_backend_name", m.generator_backend_name},
           {"event_sampling", m.event_sampling}};
  j["noise"] = m.noise ? json(*m.noise) : json(nullptr);
}

void from_json(const json& j, CorpusManifest& m) {
  const auto& c = j.at("counts");
  m.crawled = c.contains("crawled") && !c["crawled"].is_null() ? std::optional(c["crawled"].get<std::uint64_t>())
                                                                : std::nullopt;
  m.criminal = c.value("criminal", std::uint64_t{0});
  m.sampled = c.value("sampled", std::uint64_t{0});
  m.police_related = c.value("police_related", std::uint64_t{0});
  m.derived_events = c.value("derived_events", std::uint64_t{0});
  m.no_event_cases = c.value("no_event_cases", std::uint64_t{0});
  m.events = c.value("events", std::uint64_t{0});
  m.dialogues = c.value("dialogues", std::uint64_t{0});
  m.pairs = c.value("pairs", std::uint64_t{0});
  m.seeds = j.value("seeds", std::map<std::string, std::uint64_t>{});
  m.prng_algorithm_name = j.value("prng_algorithm_name", std::string{});
  m.generator_backend_name = j.value("generator_backend_name", std::string{});
  m.event_sampling = j.value("event_sampling", std::string{});
  if (j.contains("noise") && !j["noise"].is_null()) m.noise = j["noise"].get<NoiseSpec>();
}

SampleResult filter_and_sample(const std::vector<CaseLawRecord>& records, const SamplingPlan& plan) {
  if (plan.target_total < 1) fail(ErrorKind::InvalidValue, "target_total must be at least 1");
  std::vector<const CaseLawRecord*> eligible;
  for (const auto& r : records) {
    if (plan.criminal_filter(r.category_tags)) eligible.push_back(&r);
  }
  std::sort(eligible.begin(), eligible.end(),
            [](const CaseLawRecord* a, const CaseLawRecord* b) { return a->case_id < b->case_id; });
  const std::size_t take = std::min(plan.target_total, eligible.size());
  Prng rng(plan.seed);
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.index(eligible.size() - i);
    std::swap(eligible[i], eligible[j]);
  }
  SampleResult result;
  for (std::size_t i = 0; i < take; ++i) result.sample.push_back(*eligible[i]);
  std::sort(result.sample.begin(), result.sample.end(),
            [](const CaseLawRecord& a, const CaseLawRecord& b) { return a.case_id < b.case_id; });
  auto& m = result.manifest;
  m.crawled = records.size();
  m.criminal = eligible.size();
  m.sampled = take;
  m.police_related = static_cast<std::uint64_t>(std::count_if(
      result.sample.begin(), result.sample.end(),
      [&](const CaseLawRecord& r) { return plan.police_related(r.category_tags); }));
  m.seeds["sampling"] = plan.seed;
  m.prng_algorithm_name = std::string(kPrngAlgorithm);
  return result;
}

const std::vector<std::string>& action_verb_table() {
  static const std::vector<std::string> verbs = {
      "approached", "took",      "grabbed",  "struck",     "punched",   "kicked",    "pushed",    "shoved",
      "threw",      "broke",     "smashed",  "entered",    "left",      "fled",      "ran",       "drove",
      "stole",      "removed",   "carried",  "concealed",  "hid",       "dropped",   "damaged",   "sprayed",
      "displayed",  "pointed",   "threatened", "shouted",  "refused",   "sold",      "handed",    "possessed",
      "followed",   "forced",    "climbed",  "opened",     "pried",     "slashed",   "spat",      "bit",
      "called",     "reported",  "observed", "stopped",    "detained",  "arrested",  "searched",  "found",
      "recovered",  "handcuffed", "swung",   "blocked",    "walked",    "yelled",    "attempted", "loaded",
      "waved",      "broke into", "tore",    "kept",       "placed",    "picked up", "backed",    "struggled"};
  return verbs;
}

std::vector<EventRecord> derive_events(const CaseLawRecord& record) {
  std::vector<EventActor> parties;
  std::vector<CountBlock> counts;
  std::istringstream in(record.body_text);
  std::string raw;
  static const std::regex count_re(R"(^COUNT\s+(\w+)\s*:\s*(.+)$)");
  std::smatch m;
  while (std::getline(in, raw)) {
    const auto line = trim(raw);
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const auto key = trim(line.substr(0, colon));
    const auto value = trim(line.substr(colon + 1));
    if (key == "PARTIES") {
      for (const auto& entry : split(value, ';')) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos) continue;
        const auto role = party_role(trim(entry.substr(0, eq)));
        if (!role) continue;
        parties.push_back(EventActor{*role, trim(entry.substr(eq + 1))});
      }
    } else if (std::regex_match(line, m, count_re)) {
      counts.push_back(CountBlock{m[1].str(), trim(m[2].str()), {}, {}, {}});
    } else if (!counts.empty() && key == "LOCATION") {
      counts.back().location = value;
    } else if (!counts.empty() && key == "FACTS") {
      for (auto& s : split_sentences(value)) counts.back().facts.push_back(std::move(s));
    } else if (!counts.empty() && key == "OUTCOME") {
      for (auto& o : split(value, ';')) counts.back().outcomes.push_back(std::move(o));
    }
  }

  std::vector<EventRecord> events;
  for (const auto& count : counts) {
    if (count.label.empty() || count.location.empty()) continue;
    EventRecord ev;
    ev.record_id = record.case_id + "-c" + count.number;
    ev.offense_label = count.label;
    ev.location = count.location;
    ev.actors = parties;
    ev.outcome_fields = count.outcomes;
    for (const auto& sentence : count.facts) {
      if (!std::regex_match(sentence, m, action_sentence_re())) continue;
      const auto role = party_role(m[2].str());
      const std::size_t ordinal = m[1].matched ? ordinal_of(m[1].str()) : 0;
      std::optional<std::size_t> actor;
      std::size_t seen = 0;
      for (std::size_t p = 0; p < parties.size() && !actor; ++p) {
        if (parties[p].role != *role) continue;
        if (seen == ordinal) actor = p;
        ++seen;
      }
      if (!actor) continue;
      const std::string predicate = m[3].str();
      std::smatch c;
      if (!std::regex_match(predicate, c, clause_re())) continue;
      EventAction action;
      action.actor = *actor;
      action.verb_phrase = trim(c[1].str());
      action.object = object_of(action.verb_phrase);
      action.time_hint = c[2].matched ? c[2].str() : std::string{};
      action.location_hint = c[3].matched ? trim(c[3].str()) : std::string{};
      ev.actions.push_back(std::move(action));
    }
    if (ev.actions.empty() || ev.actors.empty()) continue;
    try {
      check_realizable(ev);
    } catch (const Error&) {
      continue;
    }
    events.push_back(std::move(ev));
  }
  if (events.empty()) fail(ErrorKind::NoEventFound, "case " + record.case_id + " yields no events");
  return events;
}

std::vector<EventRecord> sample_events(const std::vector<EventRecord>& pool, std::size_t count, std::uint64_t seed) {
  if (pool.empty() && count > 0) fail(ErrorKind::PreconditionViolated, "cannot sample from an empty event pool");
  Prng rng(seed);
  std::vector<EventRecord> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    EventRecord e = pool[rng.index(pool.size())];
    e.record_id += "@" + std::to_string(k);
    out.push_back(std::move(e));
  }
  return out;
}

void to_json(json& j, const FineTuneRecord& r) {
  j = json{{"id", r.id}, {"task", r.task}, {"input", r.input}, {"target", r.target}};
}

void from_json(const json& j, FineTuneRecord& r) {
  r.id = j.at("id").get<std::string>();
  r.task = j.at("task").get<std::string>();
  r.input = j.at("input").get<std::string>();
  r.target = j.at("target").get<std::string>();
}

FineTuneRecord denoise_record(const NoisyCleanPair& pair) {
  return FineTuneRecord{pair.pair_id, "denoise", serialize_transcript(pair.noisy, TranscriptFormat::Plain),
                        serialize_transcript(pair.clean, TranscriptFormat::Plain)};
}

FineTuneRecord extract_record(const Transcript& clean, const EventRecord& event) {
  return FineTuneRecord{event.record_id, "extract", serialize_transcript(clean, TranscriptFormat::Plain),
                        json(event).dump()};
}

CorpusManifest export_datasets(const std::vector<NoisyCleanPair>& pairs,
                               const std::vector<std::pair<Transcript, EventRecord>>& events,
                               const std::filesystem::path& out_dir, CorpusManifest manifest) {
  if (pairs.empty()) fail(ErrorKind::PreconditionViolated, "no noisy/clean pairs to export");
  if (events.empty()) fail(ErrorKind::PreconditionViolated, "no extraction events to export");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::IoFailure, "cannot create " + out_dir.string());

  std::string denoise, extract, pair_lines;
  for (const auto& p : pairs) {
    denoise += json(denoise_record(p)).dump() + "\n";
    pair_lines += json(p).dump() + "\n";
  }
  for (const auto& [transcript, event] : events) extract += json(extract_record(transcript, event)).dump() + "\n";

  manifest.pairs = pairs.size();
  manifest.events = events.size();
  if (manifest.dialogues == 0) {
    std::set<std::string> distinct;
    for (const auto& p : pairs) distinct.insert(p.clean.transcript_id.substr(0, p.clean.transcript_id.rfind("/s")));
    manifest.dialogues = std::min<std::uint64_t>(distinct.size(), manifest.events);
  }
  manifest.validate();

  write_file(out_dir / "denoise.jsonl", denoise);
  write_file(out_dir / "extract.jsonl", extract);
  write_file(out_dir / "pairs.jsonl", pair_lines);
  write_file(out_dir / "manifest.json", json(manifest).dump(2) + "\n");
  return manifest;
}

CorpusBuild build_corpus(const CorpusOptions& options) {
  if (options.pairs == 0 || options.events == 0)
    fail(ErrorKind::PreconditionViolated, "pairs and events must be positive");
  const auto records = load_case_law_dir(options.fixtures_dir);
  NoiseEngine engine(load_lexicons(options.asset_dir));

  SamplingPlan plan;
  plan.target_total = options.target_total;
  plan.seed = mix_seed(options.seed ^ 0x01);
  auto sampled = filter_and_sample(records, plan);

  CorpusBuild build;
  build.manifest = sampled.manifest;
  std::vector<EventRecord> derived;
  for (const auto& record : sampled.sample) {
    try {
      auto events = derive_events(record);
      derived.insert(derived.end(), events.begin(), events.end());
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoEventFound) throw;
      ++build.manifest.no_event_cases;
    }
  }
  build.manifest.derived_events = derived.size();
  if (derived.empty()) fail(ErrorKind::PreconditionViolated, "fixtures yield no events");

  const std::uint64_t pool_seed = mix_seed(options.seed ^ 0x02);
  build.event_pool = sample_events(derived, options.events, pool_seed);
  for (std::size_t k = 0; k < build.event_pool.size(); ++k) {
    const auto& ev = build.event_pool[k];
    build.extraction.emplace_back(simulate_dialogue(ev, mix_seed(pool_seed + k)), ev);
  }

  const std::uint64_t pair_seed = mix_seed(options.seed ^ 0x03);
  const std::uint64_t noise_seed = mix_seed(options.seed ^ 0x04);
  NoiseSpec base{options.word_corruption_rate, options.speaker_swap_rate, options.interjection_rate, noise_seed};
  base.validate();
  Prng rng(pair_seed);
  std::set<std::string> realized;
  for (std::size_t i = 0; i < options.pairs; ++i) {
    const auto& ev = build.event_pool[rng.index(build.event_pool.size())];
    realized.insert(ev.record_id);
    const auto clean = simulate_dialogue(ev, rng.next());
    NoiseSpec spec = base;
    spec.seed = mix_seed(noise_seed + i);
    char id[32];
    std::snprintf(id, sizeof id, "pair-%05zu", i);
    build.pairs.push_back(engine.corrupt(clean, spec, id));
  }

  auto& m = build.manifest;
  m.events = build.extraction.size();
  m.dialogues = realized.size();
  m.pairs = build.pairs.size();
  m.seeds["master"] = options.seed;
  m.seeds["event_pool"] = pool_seed;
  m.seeds["pairs"] = pair_seed;
  m.seeds["noise_base"] = noise_seed;
  m.prng_algorithm_name = std::string(kPrngAlgorithm);
  m.generator_backend_name = std::string(kTemplateGeneratorName);
  m.event_sampling = "uniform with replacement from derived events";
  m.noise = base;
  m.validate();
  return build;
}

CorpusManifest generate_corpus(const CorpusOptions& options) {
  auto build = build_corpus(options);
  return export_datasets(build.pairs, build.extraction, options.out_dir, build.manifest);
}

}  // namespace draftforge
