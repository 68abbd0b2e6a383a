#pragma once

// draftforge/dialogue.hpp — Template grammar that realizes an EventRecord as
// a multi-role interview, and its inverse.
//
// Shape of a realized dialogue (one variant per slot, picked by style seed):
//
//   OFFICER OFC1: <opening>, ... a report of <offense> at <location>.
//   per actor i:
//     OFFICER OFC1: <role question>
//     <ROLE>  P<i+1>: I'm the <role word>[, <descriptor>].
//   per action:
//     OFFICER OFC1: <action question naming the actor label>
//     <narrator>: The <label> <verb phrase>.
//     [object]   OFC1: <question> / narrator: It involved <object>.
//     [time]     OFC1: <question> / narrator: That was around <time>.
//     [location] OFC1: <question> / narrator: It happened at <place>.
//   OFFICER OFC1: <closing>
//
// Actor labels are "the <role word>" for the first actor of a role and
// "the second <role word>", "the third ..." for later ones. The narrator is
// the first victim or witness, otherwise the acting actor.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "draftforge/transcript.hpp"

namespace draftforge {

inline constexpr std::string_view kInterviewerSpeaker = "OFC1";
inline constexpr std::string_view kTemplateGeneratorName = "template-grammar-v1";
inline constexpr std::size_t kMaxActorsPerRole = 10;

// Lowercase word used in dialogue for a role ("person of interest", ...).
std::string_view role_word(SpeakerRole role);

// Dialogue label of each actor ("the suspect", "the second suspect", ...).
std::vector<std::string> actor_labels(const std::vector<EventActor>& actors);

// Throws Error(InvalidValue) if a field cannot be realized unambiguously:
// empty offense/location/verb phrase, line breaks, a trailing period, an
// offense containing " at ", Unknown actor roles, or too many actors of one role.
void check_realizable(const EventRecord& event);

// Clean, simulated transcript; deterministic in (event, style_seed).
Transcript simulate_dialogue(const EventRecord& event, std::uint64_t style_seed);

struct ParsedDialogue {
  EventRecord event;
  std::size_t opening_utterance = 0;
  // Utterances realizing each action (question and every answer), in order.
  std::vector<std::vector<std::size_t>> action_utterances;
};

// Inverse of simulate_dialogue. Each opening line starts a new record;
// segments yielding no actor or no action are dropped. Never throws on
// unstructured input; returns an empty list instead.
std::vector<ParsedDialogue> parse_template_dialogues(const Transcript& transcript);

}  // namespace draftforge
