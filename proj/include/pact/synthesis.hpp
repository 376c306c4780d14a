#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pact/contract.hpp"
#include "pact/jsonx.hpp"
#include "pact/roles.hpp"
#include "pact/trust.hpp"

namespace pact {

struct SchemaArg {
  std::string name;
  std::string type;  // free-form annotation, informational
  std::string desc;
};

// Tool description as supplied by a registry: names, free-text descriptions,
// and the two behavioral bits the draft rules condition on. Optional maps
// carry per-deployment configuration (attested output fields, explicit role
// hints for ambiguous names, discharge procedures enabled at the certified
// level).
struct ToolSchema {
  std::string tool_name;
  std::string description;
  std::vector<SchemaArg> args;
  bool side_effecting = false;
  bool reads_external = false;
  std::map<std::string, TrustLevel> attested;            // output field -> trust
  std::map<std::string, ArgRole> role_hints;             // arg -> role override
  std::map<std::string, std::vector<std::string>> discharge;  // arg -> procedures
  bool high_integrity = false;  // consumed by baseline policy builders only
};

Json schema_to_json(const ToolSchema& schema);
ToolSchema schema_from_json(const Json& j);

// One cue row of the draft-rule table: lowercase substrings that vote for a
// role. Rows are consulted in priority order (lower number wins first).
struct RoleRule {
  std::vector<std::string> cues;
  ArgRole role;
  int priority = 0;
};

// The draft rule table for a given schema. Command and content rows differ by
// side effect: a mutating "query" is a command, a read-only one is content.
std::vector<RoleRule> role_rules(bool side_effecting);

// Default floor a draft contract assigns to a role.
TrustLevel role_default_floor(ArgRole role, bool side_effecting);

// Cue match over lowercase `name + " " + description`; returns the role of
// the highest-priority matching rule, or nullopt (caller fails closed).
std::optional<ArgRole> match_role(const ToolSchema& schema, const SchemaArg& arg);

// Fail-low output defaults: EXTERNAL for tools reading external state,
// TOOL_OUTPUT otherwise; explicitly configured attested fields keep their
// configured trust.
OutputSpec default_output_spec(const ToolSchema& schema);

// Draft contract at the requested level. Unmatched arguments stay
// unspecified and fail closed at the role-checked levels. Throws SchemaError
// on a schema with no tool name.
Contract synth_contract(const ToolSchema& schema, Level level);

// The four-member chain L0..L3 sharing argument specs and output spec; the
// certified member additionally carries the configured discharge procedures.
std::vector<Contract> refinement_chain(const ToolSchema& schema);

// Same chain construction for a hand-written contract: reuse its argument
// specs and output spec at every level.
std::vector<Contract> chain_from_contract(const Contract& base);

// Diff hook: how many argument roles of `draft` agree with `gold`.
struct RoleDiff {
  std::size_t matched = 0;
  std::size_t total = 0;
};
RoleDiff diff_roles(const Contract& draft, const Contract& gold);

}  // namespace pact
