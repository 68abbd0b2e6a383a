#include <doctest.h>

#include <random>

#include "draftforge/codec.hpp"
#include "draftforge/transcript.hpp"
#include "oracles/edit_distance_oracle.hpp"
#include "support.hpp"

using namespace draftforge;
using testing_support::error_kind_of;
using testing_support::transcript_of;
using testing_support::utt;

TEST_CASE("parse_transcript: single jsonl line") {
  const auto t = parse_transcript(R"({"index":0,"speaker":"S1","role":"OFFICER","text":"Stop right there."})",
                                  TranscriptFormat::Jsonl);
  REQUIRE(t.size() == 1);
  CHECK(t.utterances[0].speaker_id == "S1");
  CHECK(t.utterances[0].role == SpeakerRole::Officer);
  CHECK(t.utterances[0].text == "Stop right there.");
  CHECK_FALSE(t.utterances[0].start_ms.has_value());
}

TEST_CASE("parse_transcript: empty input is EmptyTranscript in both formats") {
  CHECK(error_kind_of([] { parse_transcript("", TranscriptFormat::Jsonl); }) == ErrorKind::EmptyTranscript);
  CHECK(error_kind_of([] { parse_transcript("\n\n", TranscriptFormat::Plain); }) == ErrorKind::EmptyTranscript);
}

TEST_CASE("parse_transcript: plain line without separator reports its line") {
  try {
    parse_transcript("OFFICER S1 hello there", TranscriptFormat::Plain);
    FAIL("expected MalformedLine");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MalformedLine);
    CHECK(e.count() == 1);
  }
  try {
    parse_transcript("OFFICER S1: ok\nWITNESS W1 no colon", TranscriptFormat::Plain);
    FAIL("expected MalformedLine");
  } catch (const Error& e) {
    CHECK(e.count() == 2);
  }
}

TEST_CASE("parse_transcript: duplicate and non-dense jsonl indices") {
  const std::string dup =
      R"({"index":0,"speaker":"S1","role":"OFFICER","text":"a"})"
      "\n"
      R"({"index":0,"speaker":"S2","role":"WITNESS","text":"b"})";
  CHECK(error_kind_of([&] { parse_transcript(dup, TranscriptFormat::Jsonl); }) == ErrorKind::DuplicateIndex);
  CHECK(error_kind_of([] { parse_transcript("not json", TranscriptFormat::Jsonl); }) == ErrorKind::MalformedLine);
}

TEST_CASE("word_error_rate examples") {
  CHECK(word_error_rate("the cat sat", "the cat sat") == 0.0);
  CHECK(word_error_rate("the hat sat on", "the cat sat") == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(word_error_rate("", "a b") == 1.0);
  CHECK(error_kind_of([] { word_error_rate("a", ""); }) == ErrorKind::EmptyReference);
  CHECK(error_kind_of([] { word_error_rate("a", "  \t "); }) == ErrorKind::EmptyReference);
}

TEST_CASE("word_error_rate tokenization folds case, whitespace and terminal punctuation") {
  CHECK(word_error_rate("THE   Cat\tsat.", "the cat sat") == 0.0);
  CHECK(word_error_rate("the cat, sat?", "the cat sat!") == 0.0);
  CHECK(wer_tokens("Hello,  World!") == std::vector<std::string>{"hello", "world"});
}

namespace {

std::vector<std::string> all_sequences_up_to(std::size_t max_len, const std::vector<std::string>& alphabet) {
  std::vector<std::string> out{""};
  std::vector<std::string> frontier{""};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::string> next;
    for (const auto& prefix : frontier)
      for (const auto& tok : alphabet) next.push_back(prefix.empty() ? tok : prefix + " " + tok);
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

}  // namespace

TEST_CASE("edit distance matches the brute-force oracle exhaustively on short sequences") {
  const auto seqs = all_sequences_up_to(5, {"a", "b"});
  for (const auto& h : seqs) {
    for (const auto& r : seqs) {
      const auto ht = wer_tokens(h), rt = wer_tokens(r);
      const auto expected = oracle::edit_distance(ht, rt);
      REQUIRE(token_edit_distance(ht, rt) == expected);
      if (!rt.empty()) REQUIRE(word_error_rate(h, r) == doctest::Approx(double(expected) / rt.size()));
    }
  }
}

TEST_CASE("edit distance matches the oracle on random sequences up to length 12") {
  std::mt19937_64 rng(12);
  const std::vector<std::string> alphabet{"the", "cat", "sat", "on", "mat"};
  auto random_seq = [&] {
    std::vector<std::string> s(rng() % 13);
    for (auto& tok : s) tok = alphabet[rng() % alphabet.size()];
    return s;
  };
  for (int i = 0; i < 20000; ++i) {
    const auto h = random_seq(), r = random_seq();
    REQUIRE(token_edit_distance(h, r) == oracle::edit_distance(h, r));
  }
}

TEST_CASE("word_error_rate invariances on random text") {
  std::mt19937_64 rng(7);
  const std::vector<std::string> words{"Stop", "right", "there", "HANDS", "up", "okay", "car", "Red"};
  for (int i = 0; i < 2000; ++i) {
    std::string x, spaced, upper;
    const int n = 1 + rng() % 10;
    for (int k = 0; k < n; ++k) {
      const auto& w = words[rng() % words.size()];
      x += (k ? " " : "") + w;
      spaced += (k ? std::string(1 + rng() % 3, rng() % 2 ? ' ' : '\t') : "") + w;
      upper += (k ? " " : "") + to_lower_ascii(w);
    }
    REQUIRE(word_error_rate(x, x) == 0.0);
    REQUIRE(word_error_rate(spaced, x) == 0.0);
    REQUIRE(word_error_rate(upper, x) == 0.0);
  }
}

TEST_CASE("speaker_attribution_error_rate examples") {
  auto two = transcript_of({utt(0, "A", SpeakerRole::Officer, "x"), utt(1, "B", SpeakerRole::Witness, "y")});
  CHECK(speaker_attribution_error_rate(two, two) == 0.0);
  auto swapped = two;
  std::swap(swapped.utterances[0].speaker_id, swapped.utterances[1].speaker_id);
  CHECK(speaker_attribution_error_rate(swapped, two) == 1.0);

  auto four = transcript_of({utt(0, "A", SpeakerRole::Officer, "a"), utt(1, "B", SpeakerRole::Witness, "b"),
                             utt(2, "A", SpeakerRole::Officer, "c"), utt(3, "B", SpeakerRole::Witness, "d")});
  auto reassigned = four;
  reassigned.utterances[2].speaker_id = "C";
  CHECK(speaker_attribution_error_rate(reassigned, four) == doctest::Approx(0.25));
  CHECK(error_kind_of([&] { speaker_attribution_error_rate(two, four); }) == ErrorKind::LengthMismatch);
}

namespace {

Transcript random_transcript(std::mt19937_64& rng, bool with_times) {
  static const std::vector<std::string> texts{
      "Stop right there.", "What happened: tell me.", "He ran toward the exit", "okay",
      "It was \"blue\", I think", "50% sure", "Caf\xc3\xa9 on Main St", "a\\b"};
  static const SpeakerRole roles[] = {SpeakerRole::Officer, SpeakerRole::Suspect, SpeakerRole::Witness,
                                      SpeakerRole::Victim, SpeakerRole::PersonOfInterest, SpeakerRole::Dispatch,
                                      SpeakerRole::Unknown};
  Transcript t;
  t.transcript_id = "rt";
  const std::size_t n = 1 + rng() % 12;
  std::int64_t clock = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto u = utt(i, "S" + std::to_string(rng() % 5), roles[rng() % 7], texts[rng() % texts.size()]);
    if (with_times && rng() % 3 != 0) {
      u.start_ms = clock;
      clock += rng() % 4000;
      u.end_ms = clock;
    }
    t.utterances.push_back(u);
  }
  return t;
}

}  // namespace

TEST_CASE("serialize/parse round trip, both formats") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 1000; ++i) {
    const auto timed = random_transcript(rng, true);
    REQUIRE(parse_transcript(serialize_transcript(timed, TranscriptFormat::Jsonl), TranscriptFormat::Jsonl, "rt") ==
            timed);
    const auto untimed = random_transcript(rng, false);
    REQUIRE(parse_transcript(serialize_transcript(untimed, TranscriptFormat::Plain), TranscriptFormat::Plain, "rt") ==
            untimed);
  }
}

TEST_CASE("speaker_attribution_error_rate is symmetric") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    auto a = random_transcript(rng, false);
    auto b = a;
    for (auto& u : b.utterances)
      if (rng() % 2) u.speaker_id = "S" + std::to_string(rng() % 5);
    REQUIRE(speaker_attribution_error_rate(a, b) == speaker_attribution_error_rate(b, a));
  }
}

TEST_CASE("validate_transcript rejects invariant violations") {
  auto bad_text = transcript_of({utt(0, "A", SpeakerRole::Officer, " padded")});
  CHECK(error_kind_of([&] { validate_transcript(bad_text); }) == ErrorKind::InvalidValue);
  auto newline = transcript_of({utt(0, "A", SpeakerRole::Officer, "two\nlines")});
  CHECK(error_kind_of([&] { validate_transcript(newline); }) == ErrorKind::InvalidValue);
  auto times = transcript_of({utt(0, "A", SpeakerRole::Officer, "x")});
  times.utterances[0].start_ms = 10;
  times.utterances[0].end_ms = 5;
  CHECK(error_kind_of([&] { validate_transcript(times); }) == ErrorKind::InvalidValue);
  auto gap = transcript_of({utt(1, "A", SpeakerRole::Officer, "x")});
  CHECK(error_kind_of([&] { validate_transcript(gap); }) == ErrorKind::InvalidValue);
}

TEST_CASE("role tokens") {
  CHECK(parse_role("poi") == SpeakerRole::PersonOfInterest);
  CHECK(parse_role("person_of_interest") == SpeakerRole::PersonOfInterest);
  CHECK(parse_role("Officer") == SpeakerRole::Officer);
  CHECK_FALSE(parse_role("sergeant").has_value());
  for (auto r : {SpeakerRole::Officer, SpeakerRole::Suspect, SpeakerRole::Witness, SpeakerRole::Victim,
                 SpeakerRole::PersonOfInterest, SpeakerRole::Dispatch, SpeakerRole::Unknown})
    CHECK(parse_role(role_token(r)) == r);
}

TEST_CASE("event record json round trip and validation") {
  const auto& pool = testing_support::fixture_events();
  REQUIRE_FALSE(pool.empty());
  for (const auto& e : pool) {
    const Json j = e;
    REQUIRE(j.get<EventRecord>() == e);
  }
  EventRecord e;
  e.offense_label = "theft";
  CHECK(error_kind_of([&] { validate_event(e); }) == ErrorKind::InvalidValue);
  e.actors.push_back({SpeakerRole::Suspect, "a man"});
  e.actions.push_back({3, "ran", "", "", ""});
  CHECK(error_kind_of([&] { validate_event(e); }) == ErrorKind::InvalidValue);
}
