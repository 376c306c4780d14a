#pragma once

// All serialization goes through ordered_json so emitted documents keep the
// canonical key order used in the wire formats and round-trip byte-identically.
#include <json.hpp>

namespace pact {
using Json = nlohmann::ordered_json;
}
