#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <random>

#include "draftforge/backends.hpp"
#include "draftforge/codec.hpp"
#include "draftforge/noise.hpp"
#include "stub_server.hpp"
#include "support.hpp"

using namespace draftforge;
using nlohmann::json;
using testing_support::completion_body;
using testing_support::error_kind_of;
using testing_support::lexicons;
using testing_support::StubServer;
using testing_support::transcript_of;
using testing_support::utt;

namespace {

BackendDescriptor remote_for(const StubServer& stub, ModelRole role, int retries) {
  auto d = BackendDescriptor::remote(role, stub.url(), "stub-model");
  d.max_retries = retries;
  d.initial_backoff_ms = 1;
  d.timeout_ms = 2000;
  return d;
}

ModelAdapters adapters() { return ModelAdapters(lexicons(), PromptAssets::load(testing_support::asset_dir())); }

std::string user_content(const httplib::Request& req) {
  return json::parse(req.body).at("messages").at(0).at("content").get<std::string>();
}

NoiseSpec spec_of(double pw, double ps, double pi, std::uint64_t seed) {
  NoiseSpec s;
  s.word_corruption_rate = pw;
  s.speaker_swap_rate = ps;
  s.interjection_rate = pi;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("call_remote: echo stub, no retries") {
  StubServer stub([](const httplib::Request& req, httplib::Response& res) {
    res.set_content(completion_body(user_content(req)), "application/json");
  });
  const auto r = call_remote(remote_for(stub, ModelRole::Draft, 0), "hello model");
  CHECK(r.payload == "hello model");
  CHECK(r.attempt_count == 1);
  CHECK(r.backend.model_name == "stub-model");
  CHECK(r.latency_ms >= 0);
}

TEST_CASE("call_remote: request carries the chat-completion body and bearer token") {
  std::string auth, model;
  double temperature = -1;
  StubServer stub([&](const httplib::Request& req, httplib::Response& res) {
    auth = req.get_header_value("Authorization");
    const auto j = json::parse(req.body);
    model = j.at("model");
    temperature = j.at("temperature");
    res.set_content(completion_body("ok"), "application/json");
  });
  ::setenv(kModelTokenEnv, "secret-token", 1);
  call_remote(remote_for(stub, ModelRole::Extract, 0), "x");
  ::unsetenv(kModelTokenEnv);
  CHECK(auth == "Bearer secret-token");
  CHECK(model == "stub-model");
  CHECK(temperature == 0.0);
}

TEST_CASE("call_remote: fails twice then succeeds with max_retries 2") {
  std::atomic<int> calls{0};
  StubServer stub([&](const httplib::Request&, httplib::Response& res) {
    if (++calls <= 2) {
      res.status = 503;
      return;
    }
    res.set_content(completion_body("third time"), "application/json");
  });
  const auto r = call_remote(remote_for(stub, ModelRole::Draft, 2), "p");
  CHECK(r.payload == "third time");
  CHECK(r.attempt_count == 3);
  CHECK(stub.hits() == 3);
}

TEST_CASE("call_remote: always failing with max_retries 1 gives BackendUnavailable after 2 attempts") {
  StubServer stub([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  CHECK(error_kind_of([&] { call_remote(remote_for(stub, ModelRole::Draft, 1), "p"); }) ==
        ErrorKind::BackendUnavailable);
  CHECK(stub.hits() == 2);
}

TEST_CASE("call_remote: 4xx is not retried") {
  StubServer stub([](const httplib::Request&, httplib::Response& res) { res.status = 400; });
  CHECK(error_kind_of([&] { call_remote(remote_for(stub, ModelRole::Draft, 3), "p"); }) ==
        ErrorKind::BackendUnavailable);
  CHECK(stub.hits() == 1);
}

TEST_CASE("call_remote: slow stub times out") {
  StubServer stub([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(completion_body("late"), "application/json");
  });
  auto d = remote_for(stub, ModelRole::Draft, 0);
  d.timeout_ms = 150;
  CHECK(error_kind_of([&] { call_remote(d, "p"); }) == ErrorKind::TimeoutExceeded);
}

TEST_CASE("call_remote: unreachable endpoint and malformed responses") {
  auto d = BackendDescriptor::remote(ModelRole::Draft, "http://127.0.0.1:1/v1", "m");
  d.max_retries = 1;
  d.initial_backoff_ms = 1;
  d.timeout_ms = 500;
  const auto kind = error_kind_of([&] { call_remote(d, "p"); });
  CHECK((kind == ErrorKind::BackendUnavailable || kind == ErrorKind::TimeoutExceeded));

  StubServer stub([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices": []})", "application/json");
  });
  CHECK(error_kind_of([&] { call_remote(remote_for(stub, ModelRole::Draft, 0), "p"); }) ==
        ErrorKind::MalformedBackendOutput);
}

TEST_CASE("backend descriptor validation and json") {
  auto d = BackendDescriptor::remote(ModelRole::Denoise, "http://localhost:9/x", "m");
  const json j = d;
  const auto back = j.get<BackendDescriptor>();
  CHECK(back.endpoint == d.endpoint);
  CHECK(back.role == ModelRole::Denoise);
  d.endpoint.reset();
  CHECK(error_kind_of([&] { d.validate(); }) == ErrorKind::InvalidValue);
  auto b = BackendDescriptor::baseline(ModelRole::Draft);
  b.timeout_ms = 0;
  CHECK(error_kind_of([&] { b.validate(); }) == ErrorKind::InvalidValue);
  b.timeout_ms = 10;
  b.max_retries = -1;
  CHECK(error_kind_of([&] { b.validate(); }) == ErrorKind::InvalidValue);
}

TEST_CASE("baseline denoise inverts interjection-only noise exactly") {
  NoiseEngine engine(lexicons());
  const auto& pool = testing_support::fixture_events();
  const auto a = adapters();
  const auto backend = BackendDescriptor::baseline(ModelRole::Denoise);
  for (std::size_t i = 0; i < 300; ++i) {
    const auto clean = simulate_dialogue(pool[i % pool.size()], i);
    const auto pair = engine.corrupt(clean, spec_of(0, 0, 0.5, i));
    auto got = a.denoise(pair.noisy, backend);
    REQUIRE(got.utterances == clean.utterances);
  }
}

TEST_CASE("baseline denoise leaves clean transcripts unchanged") {
  const auto& pool = testing_support::fixture_events();
  const auto a = adapters();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto clean = simulate_dialogue(pool[i], 3 * i);
    REQUIRE(a.denoise(clean, BackendDescriptor::baseline(ModelRole::Denoise)).utterances == clean.utterances);
  }
}

TEST_CASE("baseline denoise: idempotent, never grows, never edits tokens, never raises WER") {
  NoiseEngine engine(lexicons());
  const auto& pool = testing_support::fixture_events();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> rate(0.0, 1.0);
  for (std::size_t i = 0; i < 500; ++i) {
    const auto clean = simulate_dialogue(pool[i % pool.size()], rng());
    const auto pair = engine.corrupt(clean, spec_of(rate(rng) * 0.3, rate(rng) * 0.3, rate(rng), rng()));
    const auto once = baseline_denoise(pair.noisy, lexicons());
    REQUIRE(baseline_denoise(once, lexicons()) == once);
    REQUIRE(once.size() <= pair.noisy.size());
    // Every surviving text is an unmodified noisy text, in order.
    std::size_t k = 0;
    for (const auto& u : once.utterances) {
      while (k < pair.noisy.size() && pair.noisy.utterances[k].text != u.text) ++k;
      REQUIRE(k < pair.noisy.size());
      ++k;
    }
    const auto ref = concatenated_text(clean);
    REQUIRE(word_error_rate(concatenated_text(once), ref) <= word_error_rate(concatenated_text(pair.noisy), ref));
  }
}

TEST_CASE("baseline denoise reassigns command phrasing to the majority officer") {
  auto t = transcript_of({utt(0, "OFC1", SpeakerRole::Officer, "What happened?"),
                          utt(1, "P1", SpeakerRole::Suspect, "Put your hands behind your back."),
                          utt(2, "P1", SpeakerRole::Suspect, "I didn't do anything.")});
  const auto out = baseline_denoise(t, lexicons());
  REQUIRE(out.size() == 3);
  const bool has_command = [&] {
    for (const auto& c : lexicons().commands)
      if (contains_phrase(t.utterances[1].text, c)) return true;
    return false;
  }();
  REQUIRE(has_command);
  CHECK(out.utterances[1].speaker_id == "OFC1");
  CHECK(out.utterances[1].role == SpeakerRole::Officer);
  CHECK(out.utterances[2].speaker_id == "P1");
}

TEST_CASE("remote denoise parses the payload; non-parseable output is MalformedBackendOutput") {
  const auto clean = transcript_of({utt(0, "OFC1", SpeakerRole::Officer, "Stop right there."),
                                    utt(1, "P1", SpeakerRole::Suspect, "Okay.")});
  StubServer good([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion_body(serialize_transcript(clean, TranscriptFormat::Plain)), "application/json");
  });
  const auto a = adapters();
  CHECK(a.denoise(clean, remote_for(good, ModelRole::Denoise, 0)).utterances == clean.utterances);

  StubServer bad([](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion_body("I'm sorry, I cannot help with that"), "application/json");
  });
  CHECK(error_kind_of([&] { a.denoise(clean, remote_for(bad, ModelRole::Denoise, 0)); }) ==
        ErrorKind::MalformedBackendOutput);
}

TEST_CASE("baseline extract_events: unstructured text gives nothing; two dialogues give two records") {
  const auto a = adapters();
  const auto baseline = BackendDescriptor::baseline(ModelRole::Extract);
  const auto plain = transcript_of({utt(0, "A", SpeakerRole::Officer, "Nice weather today."),
                                    utt(1, "B", SpeakerRole::Witness, "It sure is.")});
  CHECK(a.extract_events(plain, baseline).empty());

  const auto& pool = testing_support::fixture_events();
  REQUIRE(pool.size() >= 2);
  const auto& e1 = pool[0];
  const auto& e2 = pool[1];
  auto t = simulate_dialogue(e1, 4);
  const auto t2 = simulate_dialogue(e2, 9);
  for (auto u : t2.utterances) {
    u.index = t.size();
    t.utterances.push_back(u);
  }
  const auto events = a.extract_events(t, baseline);
  REQUIRE(events.size() == 2);
  CHECK(events[0].offense_label == e1.offense_label);
  CHECK(events[1].offense_label == e2.offense_label);
  CHECK(events[1].location == e2.location);
}

TEST_CASE("remote extract_events accepts an array or an events object") {
  const auto& e = testing_support::fixture_events().front();
  const auto clean = simulate_dialogue(e, 1);
  const auto a = adapters();
  StubServer arr([&](const httplib::Request& req, httplib::Response& res) {
    CHECK(user_content(req).find(clean.utterances[0].text) != std::string::npos);
    res.set_content(completion_body(json::array({json(e)}).dump()), "application/json");
  });
  auto got = a.extract_events(clean, remote_for(arr, ModelRole::Extract, 0));
  REQUIRE(got.size() == 1);
  CHECK(got[0] == e);

  StubServer obj([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion_body(json{{"events", json::array({json(e)})}}.dump()), "application/json");
  });
  CHECK(a.extract_events(clean, remote_for(obj, ModelRole::Extract, 0)).size() == 1);

  StubServer junk([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(completion_body("{\"events\": 3}"), "application/json");
  });
  CHECK(error_kind_of([&] { a.extract_events(clean, remote_for(junk, ModelRole::Extract, 0)); }) ==
        ErrorKind::MalformedBackendOutput);
}
