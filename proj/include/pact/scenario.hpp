#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pact/contract.hpp"
#include "pact/jsonx.hpp"
#include "pact/monitor.hpp"
#include "pact/synthesis.hpp"

namespace pact {

// How a tool-call argument gets its value: a recorded session value by id, a
// bare payload left to the provenance resolver, or a client-side combination
// of parts (payload concatenated, tags merged).
struct ArgBinding {
  enum class Kind { Ref, Raw, Merge };
  Kind kind = Kind::Ref;
  std::string ref;
  Json payload;
  std::vector<ArgBinding> parts;
};

struct TraceStep {
  enum class Kind { InjectUser, InjectExternal, ToolCall };
  Kind kind = Kind::InjectUser;

  Json payload;          // inject_user / inject_external
  std::string user_id;   // optional id hint for inject_user

  std::string source;                // inject_external
  std::string origin_kind = "tool";  // origin namespace for the injected read

  std::string tool;  // tool_call
  std::vector<std::pair<std::string, ArgBinding>> args;
  Decision expect = Decision::Allow;
  Json outputs;                        // scripted outputs for replay
  std::optional<bool> resolver_mode;   // overrides the scenario default
};

// One scripted mixed-trust task: tool schemas (drafted into contracts) or
// hand-written contracts, trusted constants, and an ordered trace with
// per-call expectations. An attack scenario designates its attack step by
// the single BLOCK expectation.
struct Scenario {
  std::string id;
  std::string domain;
  bool attack = false;
  std::vector<ToolSchema> schemas;
  std::vector<Contract> handwritten;
  std::map<std::string, Json> constants;
  bool resolver_mode_default = false;
  std::vector<TraceStep> trace;
};

// Structural checks: non-empty id and trace, benign scenarios expect no
// blocks, attack scenarios expect exactly one. Throws ScenarioError.
void validate_scenario(const Scenario& s);

Json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const Json& j);

}  // namespace pact
