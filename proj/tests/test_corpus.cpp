#include <doctest.h>

#include <fstream>
#include <set>

#include "draftforge/backends.hpp"
#include "draftforge/codec.hpp"
#include "draftforge/corpus.hpp"
#include "draftforge/dialogue.hpp"
#include "support.hpp"

using namespace draftforge;
using testing_support::caselaw_by_id;
using testing_support::error_kind_of;
using testing_support::TempDir;

namespace {

std::vector<CaseLawRecord> synthetic_pool(std::size_t n, bool criminal = true) {
  std::vector<CaseLawRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    CaseLawRecord r;
    r.case_id = "SYN-" + std::to_string(1000 + i);
    r.jurisdiction = "Test";
    r.year = 2020;
    r.category_tags = criminal ? std::set<std::string>{"criminal"} : std::set<std::string>{"civil"};
    if (i % 3 == 0) r.category_tags.insert("police");
    r.body_text = "COUNT 1: theft";
    out.push_back(r);
  }
  return out;
}

std::set<std::string> ids_of(const std::vector<CaseLawRecord>& records) {
  std::set<std::string> ids;
  for (const auto& r : records) ids.insert(r.case_id);
  return ids;
}

std::vector<std::string> verbs_of(const EventRecord& e) {
  std::vector<std::string> v;
  for (const auto& a : e.actions) v.push_back(a.verb_phrase);
  return v;
}

std::vector<SpeakerRole> roles_of(const EventRecord& e) {
  std::vector<SpeakerRole> v;
  for (const auto& a : e.actors) v.push_back(a.role);
  return v;
}

std::string slurp(const std::filesystem::path& p) { return read_text_file(p); }

}  // namespace

TEST_CASE("derive_events: theft from parking garage yields one event") {
  const auto events = derive_events(caselaw_by_id("CL-0001"));
  REQUIRE(events.size() == 1);
  CHECK(events[0].offense_label == "theft");
  CHECK(events[0].location == "parking garage");
  CHECK_NOTHROW(validate_event(events[0]));
}

TEST_CASE("derive_events: two charged counts yield two events") {
  const auto events = derive_events(caselaw_by_id("CL-0002"));
  REQUIRE(events.size() == 2);
  CHECK(events[0].offense_label == "robbery");
  CHECK(events[1].offense_label == "assault");
  CHECK(events[1].location == "convenience store parking lot");
}

TEST_CASE("derive_events: no pattern match is NoEventFound") {
  CHECK(error_kind_of([] { derive_events(caselaw_by_id("CL-0003")); }) == ErrorKind::NoEventFound);
  CaseLawRecord r;
  r.case_id = "X";
  r.body_text = "Nothing structured here at all.";
  CHECK(error_kind_of([&] { derive_events(r); }) == ErrorKind::NoEventFound);
}

TEST_CASE("filter_and_sample: target 10 of 100 eligible is a deterministic set of 10") {
  auto pool = synthetic_pool(100);
  auto extra = synthetic_pool(20, false);
  for (auto& r : extra) r.case_id = "CIV-" + r.case_id;
  pool.insert(pool.end(), extra.begin(), extra.end());
  SamplingPlan plan;
  plan.target_total = 10;
  plan.seed = 42;
  const auto a = filter_and_sample(pool, plan);
  CHECK(a.sample.size() == 10);
  CHECK(ids_of(a.sample).size() == 10);
  for (const auto& r : a.sample) CHECK(r.category_tags.count("criminal"));
  CHECK(a.manifest.criminal == 100);
  CHECK(a.manifest.sampled == 10);
  CHECK(a.manifest.criminal >= a.manifest.sampled);
  CHECK(a.manifest.sampled >= a.manifest.police_related);

  std::reverse(pool.begin(), pool.end());
  const auto b = filter_and_sample(pool, plan);
  CHECK(ids_of(b.sample) == ids_of(a.sample));
  plan.seed = 43;
  CHECK(ids_of(filter_and_sample(pool, plan).sample) != ids_of(a.sample));
}

TEST_CASE("filter_and_sample: target above the pool returns the whole pool") {
  SamplingPlan plan;
  plan.target_total = 10;
  const auto r = filter_and_sample(synthetic_pool(5), plan);
  CHECK(r.sample.size() == 5);
  CHECK(r.manifest.sampled == 5);
}

TEST_CASE("reference manifest records paper-scale stage counts") {
  const auto j = nlohmann::json::parse(slurp(testing_support::asset_dir() / "fixtures" / "reference_manifest.json"));
  const auto m = j.get<CorpusManifest>();
  CHECK(m.criminal == 923127);
  CHECK(m.sampled == 10000);
  CHECK(m.police_related == 3669);
  CHECK(m.pairs == 500);
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("manifest validation enforces stage monotonicity") {
  CorpusManifest m;
  m.criminal = 10;
  m.sampled = 11;
  CHECK(error_kind_of([&] { m.validate(); }) == ErrorKind::InvalidValue);
  m.sampled = 5;
  m.police_related = 6;
  CHECK(error_kind_of([&] { m.validate(); }) == ErrorKind::InvalidValue);
  m.police_related = 2;
  m.events = 3;
  m.dialogues = 4;
  CHECK(error_kind_of([&] { m.validate(); }) == ErrorKind::InvalidValue);
  m.dialogues = 3;
  m.crawled = 9;
  CHECK(error_kind_of([&] { m.validate(); }) == ErrorKind::InvalidValue);
  m.crawled = 10;
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("simulate_dialogue: one actor, one action") {
  EventRecord e;
  e.record_id = "E1";
  e.offense_label = "vandalism";
  e.location = "the north parking lot";
  e.actors = {{SpeakerRole::Suspect, "a teenager"}};
  e.actions = {{0, "sprayed paint on the wall", "", "", ""}};
  const auto t = simulate_dialogue(e, 1);
  CHECK(t.size() >= 4);
  CHECK(t.source == TranscriptSource::Simulated);
  const auto all = concatenated_text(t);
  CHECK(all.find("sprayed paint on the wall") != std::string::npos);
  CHECK(all.find("the north parking lot") != std::string::npos);
  CHECK(simulate_dialogue(e, 1) == t);
  CHECK_NOTHROW(validate_transcript(t));
}

TEST_CASE("simulate_dialogue rejects unrealizable events") {
  EventRecord e;
  e.offense_label = "theft at night";
  e.location = "store";
  e.actors = {{SpeakerRole::Suspect, ""}};
  e.actions = {{0, "took a bag", "", "", ""}};
  CHECK(error_kind_of([&] { simulate_dialogue(e, 0); }) == ErrorKind::InvalidValue);
  e.offense_label = "theft";
  e.actors[0].role = SpeakerRole::Unknown;
  CHECK(error_kind_of([&] { simulate_dialogue(e, 0); }) == ErrorKind::InvalidValue);
}

TEST_CASE("generator/extractor round trip over fixture events and many style seeds") {
  const auto pool = sample_events(testing_support::fixture_events(), 200, 11);
  REQUIRE(pool.size() == 200);
  std::size_t checked = 0;
  for (const auto& e : pool) {
    for (std::uint64_t seed : {0ULL, 1ULL, 0xDEADBEEFULL, 987654321ULL}) {
      const auto t = simulate_dialogue(e, seed);
      const auto parsed = parse_template_dialogues(t);
      REQUIRE(parsed.size() == 1);
      const auto& got = parsed[0].event;
      REQUIRE(got.offense_label == e.offense_label);
      REQUIRE(got.location == e.location);
      REQUIRE(roles_of(got) == roles_of(e));
      REQUIRE(verbs_of(got) == verbs_of(e));
      ++checked;
    }
  }
  CHECK(checked == 800);
}

TEST_CASE("sample_events draws with replacement and tags copies") {
  const auto& pool = testing_support::fixture_events();
  const auto a = sample_events(pool, 300, 5);
  CHECK(a.size() == 300);
  CHECK(sample_events(pool, 300, 5) == a);
  std::set<std::string> ids;
  for (const auto& e : a) {
    CHECK(e.record_id.find('@') != std::string::npos);
    ids.insert(e.record_id);
  }
  CHECK(ids.size() == 300);
}

TEST_CASE("export_datasets: counts, integrity and byte determinism") {
  CorpusOptions opts;
  opts.fixtures_dir = testing_support::caselaw_dir();
  opts.asset_dir = testing_support::asset_dir();
  const auto build = build_corpus(opts);
  REQUIRE(build.pairs.size() == 500);
  REQUIRE(build.extraction.size() == 200);
  CHECK_NOTHROW(build.manifest.validate());
  CHECK(build.manifest.prng_algorithm_name == "mt19937_64");
  REQUIRE(build.manifest.noise.has_value());

  TempDir a, b;
  const auto m = export_datasets(build.pairs, build.extraction, a.path(), build.manifest);
  export_datasets(build.pairs, build.extraction, b.path(), build.manifest);
  CHECK(m.pairs == 500);
  CHECK(m.dialogues <= m.events);
  for (const char* name : {"denoise.jsonl", "extract.jsonl", "pairs.jsonl", "manifest.json"})
    CHECK(slurp(a.path() / name) == slurp(b.path() / name));

  std::ifstream denoise(a.path() / "denoise.jsonl");
  std::string line;
  std::size_t records = 0;
  while (std::getline(denoise, line)) {
    const auto r = nlohmann::json::parse(line).get<FineTuneRecord>();
    CHECK(r.task == "denoise");
    const auto target = parse_transcript(r.target, TranscriptFormat::Plain);
    REQUIRE_NOTHROW(validate_transcript(target));
    ++records;
  }
  CHECK(records == 500);

  std::ifstream extract(a.path() / "extract.jsonl");
  records = 0;
  while (std::getline(extract, line)) {
    const auto r = nlohmann::json::parse(line).get<FineTuneRecord>();
    CHECK(r.task == "extract");
    REQUIRE_NOTHROW(validate_event(nlohmann::json::parse(r.target).get<EventRecord>()));
    ++records;
  }
  CHECK(records == 200);
}

TEST_CASE("export_datasets: empty inputs violate the precondition") {
  CorpusOptions opts;
  opts.fixtures_dir = testing_support::caselaw_dir();
  opts.asset_dir = testing_support::asset_dir();
  opts.pairs = 1;
  opts.events = 1;
  const auto build = build_corpus(opts);
  TempDir dir;
  CHECK(error_kind_of([&] { export_datasets(build.pairs, {}, dir.path(), build.manifest); }) ==
        ErrorKind::PreconditionViolated);
  CHECK(error_kind_of([&] { export_datasets({}, build.extraction, dir.path(), build.manifest); }) ==
        ErrorKind::PreconditionViolated);
}

TEST_CASE("parse_case_law reports bad lines and duplicates") {
  try {
    parse_case_law("{\"case_id\":\"A\",\"body_text\":\"x\"}\nnot json\n");
    FAIL("expected MalformedLine");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MalformedLine);
    CHECK(e.count() == 2);
  }
  CHECK(error_kind_of([] {
          parse_case_law("{\"case_id\":\"A\",\"body_text\":\"x\"}\n{\"case_id\":\"A\",\"body_text\":\"y\"}\n");
        }) == ErrorKind::InvalidValue);
}
