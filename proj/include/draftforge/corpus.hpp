#pragma once

// draftforge/corpus.hpp — Desk-scale training-data generation: case-law
// records are filtered and sampled, events are derived by rule, dialogues are
// realized from events, and fine-tune datasets are exported with a manifest.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "draftforge/noise.hpp"
#include "draftforge/transcript.hpp"

namespace draftforge {

// body_text is a simplified structured record:
//
//   PARTIES: suspect = a man in a gray hoodie; victim = the garage attendant
//   COUNT 1: theft
//   LOCATION: parking garage
//   FACTS: The suspect took a laptop bag from a parked car at about 10:15 PM.
//   OUTCOME: arrest made; property recovered
//
// Each COUNT opens a block holding its own LOCATION, FACTS and OUTCOME lines.
struct CaseLawRecord {
  std::string case_id;
  std::string jurisdiction;
  int year = 0;
  std::set<std::string> category_tags;
  std::string body_text;
};

void to_json(nlohmann::json& j, const CaseLawRecord& r);
void from_json(const nlohmann::json& j, CaseLawRecord& r);

// One record per jsonl line. Throws InvalidValue on duplicate case ids or an
// empty body, MalformedLine (count = line) on unparsable lines.
std::vector<CaseLawRecord> parse_case_law(std::string_view jsonl);
// Every *.jsonl file under dir, in filename order.
std::vector<CaseLawRecord> load_case_law_dir(const std::filesystem::path& dir);

using TagPredicate = std::function<bool(const std::set<std::string>&)>;

TagPredicate has_tag(std::string tag);

struct SamplingPlan {
  TagPredicate criminal_filter = has_tag("criminal");
  std::size_t target_total = 10000;
  TagPredicate police_related = has_tag("police");
  std::uint64_t seed = 0;
};

struct CorpusManifest {
  std::optional<std::uint64_t> crawled;
  std::uint64_t criminal = 0;
  std::uint64_t sampled = 0;
  std::uint64_t police_related = 0;
  std::uint64_t derived_events = 0;   // events extracted from sampled cases
  std::uint64_t no_event_cases = 0;   // sampled cases skipped with NoEventFound
  std::uint64_t events = 0;           // event records in the extraction dataset
  std::uint64_t dialogues = 0;        // distinct events realized for noisy/clean pairs
  std::uint64_t pairs = 0;            // noisy/clean pairs in the denoise dataset
  std::map<std::string, std::uint64_t> seeds;
  std::string prng_algorithm_name;
  std::string generator_backend_name;
  std::string event_sampling;         // how the event pool was drawn
  std::optional<NoiseSpec> noise;

  // Throws InvalidValue when stage counts increase along the filter chain
  // (crawled >= criminal >= sampled >= police_related) or dialogues > events.
  void validate() const;
};

void to_json(nlohmann::json& j, const CorpusManifest& m);
void from_json(const nlohmann::json& j, CorpusManifest& m);

struct SampleResult {
  std::vector<CaseLawRecord> sample;  // ordered by case_id
  CorpusManifest manifest;
};

// Uniform sample without replacement of min(target_total, eligible) records
// passing the criminal filter. Independent of input order.
SampleResult filter_and_sample(const std::vector<CaseLawRecord>& records, const SamplingPlan& plan);

// Rule-based extraction over the structured body. One EventRecord per COUNT
// with at least one FACTS sentence matching the verb table. Throws NoEventFound.
std::vector<EventRecord> derive_events(const CaseLawRecord& record);

// Verb table used by derive_events (past-tense heads of action sentences).
const std::vector<std::string>& action_verb_table();

// Draws `count` events uniformly with replacement; each copy gets the record
// id "<source id>@<k>".
std::vector<EventRecord> sample_events(const std::vector<EventRecord>& pool, std::size_t count, std::uint64_t seed);

// Fine-tune exchange record.
struct FineTuneRecord {
  std::string id;
  std::string task;  // "denoise" | "extract"
  std::string input;
  std::string target;
};

void to_json(nlohmann::json& j, const FineTuneRecord& r);
void from_json(const nlohmann::json& j, FineTuneRecord& r);

FineTuneRecord denoise_record(const NoisyCleanPair& pair);
FineTuneRecord extract_record(const Transcript& clean, const EventRecord& event);

// Writes denoise.jsonl, extract.jsonl, pairs.jsonl and manifest.json under
// out_dir. Output bytes depend only on the inputs. Throws
// PreconditionViolated for empty inputs and IoFailure on write errors.
CorpusManifest export_datasets(const std::vector<NoisyCleanPair>& pairs,
                               const std::vector<std::pair<Transcript, EventRecord>>& events,
                               const std::filesystem::path& out_dir, CorpusManifest manifest);

struct CorpusOptions {
  std::filesystem::path fixtures_dir;
  std::filesystem::path asset_dir;
  std::filesystem::path out_dir;
  std::size_t pairs = 500;
  std::size_t events = 200;
  std::uint64_t seed = 1;
  double word_corruption_rate = 0.1;
  double speaker_swap_rate = 0.1;
  double interjection_rate = 0.3;
  std::size_t target_total = 10000;
};

struct CorpusBuild {
  std::vector<EventRecord> event_pool;
  std::vector<std::pair<Transcript, EventRecord>> extraction;
  std::vector<NoisyCleanPair> pairs;
  CorpusManifest manifest;
};

// Runs the whole pipeline in memory. Cases are processed in case_id order.
CorpusBuild build_corpus(const CorpusOptions& options);

// build_corpus followed by export_datasets.
CorpusManifest generate_corpus(const CorpusOptions& options);

}  // namespace draftforge
