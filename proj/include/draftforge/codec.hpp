#pragma once

// draftforge/codec.hpp — JSON encoding of the transcript-core value types.

#include <json.hpp>

#include "draftforge/error.hpp"
#include "draftforge/transcript.hpp"

namespace draftforge {

using Json = nlohmann::json;

void to_json(Json& j, const Utterance& u);
void from_json(const Json& j, Utterance& u);
void to_json(Json& j, const Transcript& t);
void from_json(const Json& j, Transcript& t);
void to_json(Json& j, const CaseMetadata& m);
void from_json(const Json& j, CaseMetadata& m);
void to_json(Json& j, const EventActor& a);
void from_json(const Json& j, EventActor& a);
void to_json(Json& j, const EventAction& a);
void from_json(const Json& j, EventAction& a);
void to_json(Json& j, const EventRecord& e);
void from_json(const Json& j, EventRecord& e);

// Parses a JSON document, rethrowing parse and type errors as
// Error(MalformedBackendOutput) or the supplied kind.
Json parse_json(std::string_view text, ErrorKind on_error);

}  // namespace draftforge
