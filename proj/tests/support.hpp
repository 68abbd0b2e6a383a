#pragma once

// Shared test fixtures: scratch directories, bundled assets, small builders.

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "draftforge/corpus.hpp"
#include "draftforge/dialogue.hpp"
#include "draftforge/error.hpp"
#include "draftforge/lexicon.hpp"
#include "draftforge/transcript.hpp"

namespace testing_support {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("draftforge-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline fs::path asset_dir() { return draftforge::default_asset_dir(); }
inline fs::path caselaw_dir() { return asset_dir() / "fixtures" / "caselaw"; }

inline const draftforge::LexiconSet& lexicons() {
  static const auto set = draftforge::load_lexicons(asset_dir());
  return set;
}

inline const std::vector<draftforge::CaseLawRecord>& caselaw() {
  static const auto records = draftforge::load_case_law_dir(caselaw_dir());
  return records;
}

inline const draftforge::CaseLawRecord& caselaw_by_id(const std::string& id) {
  for (const auto& r : caselaw())
    if (r.case_id == id) return r;
  throw std::runtime_error("no fixture " + id);
}

// Every event derivable from the bundled fixtures, in case order.
inline const std::vector<draftforge::EventRecord>& fixture_events() {
  static const auto pool = [] {
    std::vector<draftforge::EventRecord> out;
    for (const auto& r : caselaw()) {
      try {
        auto events = draftforge::derive_events(r);
        out.insert(out.end(), events.begin(), events.end());
      } catch (const draftforge::Error&) {
      }
    }
    return out;
  }();
  return pool;
}

inline draftforge::Utterance utt(std::size_t index, std::string speaker, draftforge::SpeakerRole role,
                                 std::string text) {
  draftforge::Utterance u;
  u.index = index;
  u.speaker_id = std::move(speaker);
  u.role = role;
  u.text = std::move(text);
  return u;
}

inline draftforge::Transcript transcript_of(std::vector<draftforge::Utterance> utterances,
                                            std::string id = "t-test") {
  draftforge::Transcript t;
  t.transcript_id = std::move(id);
  t.utterances = std::move(utterances);
  return t;
}

// Runs fn and returns the ErrorKind it throws; fails the test if none.
template <class F>
draftforge::ErrorKind error_kind_of(F&& fn) {
  try {
    fn();
  } catch (const draftforge::Error& e) {
    return e.kind();
  }
  throw std::runtime_error("expected a draftforge::Error");
}

}  // namespace testing_support
