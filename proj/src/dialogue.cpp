#include "draftforge/dialogue.hpp"

#include <array>
#include <cctype>
#include <optional>
#include <regex>

#include "draftforge/error.hpp"
#include "draftforge/prng.hpp"

namespace draftforge {

namespace {

constexpr std::array<std::string_view, kMaxActorsPerRole> kOrdinals = {
    "", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth"};

constexpr std::array<std::string_view, 3> kOpenings = {
    "Officer on scene, responding to a report of ",
    "This is the responding unit, I'm here on a report of ",
    "Good evening, I'm responding to a report of ",
};
constexpr std::array<std::string_view, 3> kRoleQuestions = {
    "How are you involved here?",
    "Can you tell me who you are in all this?",
    "And what is your part in this?",
};
constexpr std::array<std::string_view, 3> kObjectQuestions = {"What was involved?", "What did that involve?",
                                                               "What was that about?"};
constexpr std::array<std::string_view, 3> kTimeQuestions = {"When was that?", "What time was that?",
                                                             "Do you know the time?"};
constexpr std::array<std::string_view, 3> kPlaceQuestions = {"Where exactly?", "Where did that happen?",
                                                              "Where was this?"};
constexpr std::array<std::string_view, 3> kClosings = {
    "Okay, thank you, that is all for now.",
    "Alright, I have what I need.",
    "Thanks, I'll write this up.",
};

const std::regex& opening_re() {
  static const std::regex re(R"(report of (.+?) at (.+)\.$)");
  return re;
}
const std::regex& intro_re() {
  static const std::regex re(R"(^I'm the (officer|suspect|witness|victim|person of interest|dispatcher)(?:, (.+))?\.$)");
  return re;
}
const std::regex& narration_re() {
  static const std::regex re(
      R"(^The (?:(second|third|fourth|fifth|sixth|seventh|eighth|ninth|tenth) )?)"
      R"((officer|suspect|witness|victim|person of interest|dispatcher) (.+)\.$)");
  return re;
}
const std::regex& object_re() {
  static const std::regex re(R"(^It involved (.+)\.$)");
  return re;
}
const std::regex& time_re() {
  static const std::regex re(R"(^That was around (.+)\.$)");
  return re;
}
const std::regex& place_re() {
  static const std::regex re(R"(^It happened at (.+)\.$)");
  return re;
}

std::optional<SpeakerRole> role_from_word(std::string_view word) {
  for (auto role : {SpeakerRole::Officer, SpeakerRole::Suspect, SpeakerRole::Witness, SpeakerRole::Victim,
                    SpeakerRole::PersonOfInterest, SpeakerRole::Dispatch}) {
    if (role_word(role) == word) return role;
  }
  return std::nullopt;
}

std::size_t ordinal_index(std::string_view word) {
  for (std::size_t i = 1; i < kOrdinals.size(); ++i) {
    if (kOrdinals[i] == word) return i;
  }
  return 0;
}

// Ordinal of each actor among actors sharing its role.
std::vector<std::size_t> role_ordinals(const std::vector<EventActor>& actors) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < actors.size(); ++i) {
    std::size_t n = 0;
    for (std::size_t j = 0; j < i; ++j) n += actors[j].role == actors[i].role ? 1 : 0;
    out.push_back(n);
  }
  return out;
}

std::string actor_label(const EventActor& actor, std::size_t ordinal) {
  std::string label = "the ";
  if (ordinal > 0) {
    label += kOrdinals[ordinal];
    label += ' ';
  }
  label += role_word(actor.role);
  return label;
}

std::string capitalized(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

void check_field(const std::string& value, const char* name, bool required) {
  if (required && value.empty()) fail(ErrorKind::InvalidValue, std::string(name) + " is empty");
  if (value.empty()) return;
  if (value != trim(value)) fail(ErrorKind::InvalidValue, std::string(name) + " has surrounding whitespace");
  if (value.find_first_of("\r\n") != std::string::npos)
    fail(ErrorKind::InvalidValue, std::string(name) + " contains a line break");
  if (value.back() == '.') fail(ErrorKind::InvalidValue, std::string(name) + " ends with a period");
}

class Builder {
 public:
  Builder(Transcript& t) : t_(t) {}
  void say(std::string speaker, SpeakerRole role, std::string text) {
    Utterance u;
    u.index = t_.utterances.size();
    u.speaker_id = std::move(speaker);
    u.role = role;
    u.text = std::move(text);
    t_.utterances.push_back(std::move(u));
  }
  void officer(std::string text) { say(std::string(kInterviewerSpeaker), SpeakerRole::Officer, std::move(text)); }

 private:
  Transcript& t_;
};

template <std::size_t N>
std::string pick(const std::array<std::string_view, N>& options, Prng& rng) {
  return std::string(options[rng.index(N)]);
}

}  // namespace

std::vector<std::string> actor_labels(const std::vector<EventActor>& actors) {
  const auto ordinals = role_ordinals(actors);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < actors.size(); ++i) {
    if (ordinals[i] < kMaxActorsPerRole) {
      out.push_back(actor_label(actors[i], ordinals[i]));
    } else {
      out.push_back("the " + std::string(role_word(actors[i].role)) + " #" + std::to_string(ordinals[i] + 1));
    }
  }
  return out;
}

std::string_view role_word(SpeakerRole role) {
  switch (role) {
    case SpeakerRole::Officer: return "officer";
    case SpeakerRole::Suspect: return "suspect";
    case SpeakerRole::Witness: return "witness";
    case SpeakerRole::Victim: return "victim";
    case SpeakerRole::PersonOfInterest: return "person of interest";
    case SpeakerRole::Dispatch: return "dispatcher";
    case SpeakerRole::Unknown: return "unknown";
  }
  return "unknown";
}

void check_realizable(const EventRecord& event) {
  validate_event(event);
  check_field(event.offense_label, "offense_label", true);
  check_field(event.location, "location", true);
  if (event.offense_label.find(" at ") != std::string::npos)
    fail(ErrorKind::InvalidValue, "offense_label contains ' at '");
  const auto ordinals = role_ordinals(event.actors);
  for (std::size_t i = 0; i < event.actors.size(); ++i) {
    if (event.actors[i].role == SpeakerRole::Unknown) fail(ErrorKind::InvalidValue, "actor with Unknown role");
    if (ordinals[i] >= kMaxActorsPerRole) fail(ErrorKind::InvalidValue, "too many actors with one role");
    check_field(event.actors[i].descriptor, "descriptor", false);
  }
  for (const auto& a : event.actions) {
    check_field(a.verb_phrase, "verb_phrase", true);
    check_field(a.object, "object", false);
    check_field(a.time_hint, "time_hint", false);
    check_field(a.location_hint, "location_hint", false);
  }
}

Transcript simulate_dialogue(const EventRecord& event, std::uint64_t style_seed) {
  check_realizable(event);
  Prng rng(mix_seed(style_seed));
  Transcript t;
  t.transcript_id = event.record_id + "/s" + std::to_string(style_seed);
  t.source = TranscriptSource::Simulated;
  Builder b(t);

  b.officer(pick(kOpenings, rng) + event.offense_label + " at " + event.location + ".");

  std::vector<std::string> speakers;
  for (std::size_t i = 0; i < event.actors.size(); ++i) {
    const auto& actor = event.actors[i];
    speakers.push_back("P" + std::to_string(i + 1));
    b.officer(pick(kRoleQuestions, rng));
    std::string reply = "I'm the " + std::string(role_word(actor.role));
    if (!actor.descriptor.empty()) reply += ", " + actor.descriptor;
    b.say(speakers.back(), actor.role, reply + ".");
  }

  std::optional<std::size_t> witness;
  for (std::size_t i = 0; i < event.actors.size() && !witness; ++i) {
    if (event.actors[i].role == SpeakerRole::Victim || event.actors[i].role == SpeakerRole::Witness) witness = i;
  }

  const auto ordinals = role_ordinals(event.actors);
  for (std::size_t k = 0; k < event.actions.size(); ++k) {
    const auto& action = event.actions[k];
    const auto label = actor_label(event.actors[action.actor], ordinals[action.actor]);
    const std::size_t narrator = witness.value_or(action.actor);
    const auto& nspeaker = speakers[narrator];
    const auto nrole = event.actors[narrator].role;

    switch (rng.index(3)) {
      case 0: b.officer("What did " + label + " do?"); break;
      case 1: b.officer("Then what did " + label + " do?"); break;
      default: b.officer("Walk me through what " + label + " did."); break;
    }
    b.say(nspeaker, nrole, capitalized(label) + " " + action.verb_phrase + ".");
    if (!action.object.empty()) {
      b.officer(pick(kObjectQuestions, rng));
      b.say(nspeaker, nrole, "It involved " + action.object + ".");
    }
    if (!action.time_hint.empty()) {
      b.officer(pick(kTimeQuestions, rng));
      b.say(nspeaker, nrole, "That was around " + action.time_hint + ".");
    }
    if (!action.location_hint.empty()) {
      b.officer(pick(kPlaceQuestions, rng));
      b.say(nspeaker, nrole, "It happened at " + action.location_hint + ".");
    }
  }
  b.officer(pick(kClosings, rng));
  return t;
}

std::vector<ParsedDialogue> parse_template_dialogues(const Transcript& transcript) {
  std::vector<ParsedDialogue> out;
  std::optional<ParsedDialogue> current;
  std::vector<std::size_t> ordinals_seen;  // per actor, ordinal among its role

  const auto flush = [&] {
    if (current && !current->event.actors.empty() && !current->event.actions.empty()) {
      current->event.record_id = transcript.transcript_id + "#" + std::to_string(out.size());
      out.push_back(std::move(*current));
    }
    current.reset();
    ordinals_seen.clear();
  };

  std::smatch m;
  for (std::size_t i = 0; i < transcript.utterances.size(); ++i) {
    const std::string& text = transcript.utterances[i].text;
    const auto try_opening = [&] {
      if (!std::regex_search(text, m, opening_re())) return;
      flush();
      current.emplace();
      current->event.offense_label = m[1].str();
      current->event.location = m[2].str();
      current->opening_utterance = i;
    };
    if (!current) {
      try_opening();
      continue;
    }
    auto& ev = current->event;
    const auto attach = [&](std::string EventAction::*field, const std::string& value) {
      if (ev.actions.empty()) return;
      ev.actions.back().*field = value;
      auto& sources = current->action_utterances.back();
      if (i > 0 && transcript.utterances[i - 1].role == SpeakerRole::Officer) sources.push_back(i - 1);
      sources.push_back(i);
    };
    if (std::regex_match(text, m, intro_re())) {
      const auto role = role_from_word(m[1].str());
      std::size_t n = 0;
      for (const auto& a : ev.actors) n += a.role == *role ? 1 : 0;
      ev.actors.push_back(EventActor{*role, m[2].matched ? m[2].str() : std::string{}});
      ordinals_seen.push_back(n);
    } else if (std::regex_match(text, m, narration_re())) {
      const auto role = role_from_word(m[2].str());
      const std::size_t ordinal = m[1].matched ? ordinal_index(m[1].str()) : 0;
      std::optional<std::size_t> actor;
      for (std::size_t a = 0; a < ev.actors.size(); ++a) {
        if (ev.actors[a].role == *role && ordinals_seen[a] == ordinal) actor = a;
      }
      if (!actor) continue;
      EventAction action;
      action.actor = *actor;
      action.verb_phrase = m[3].str();
      ev.actions.push_back(std::move(action));
      current->action_utterances.emplace_back();
      auto& sources = current->action_utterances.back();
      if (i > 0 && transcript.utterances[i - 1].role == SpeakerRole::Officer) sources.push_back(i - 1);
      sources.push_back(i);
    } else if (std::regex_match(text, m, object_re())) {
      attach(&EventAction::object, m[1].str());
    } else if (std::regex_match(text, m, time_re())) {
      attach(&EventAction::time_hint, m[1].str());
    } else if (std::regex_match(text, m, place_re())) {
      attach(&EventAction::location_hint, m[1].str());
    } else {
      try_opening();
    }
  }
  flush();
  return out;
}

}  // namespace draftforge
