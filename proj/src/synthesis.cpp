#include "pact/synthesis.hpp"

#include <algorithm>
#include <cctype>

#include "pact/errors.hpp"

namespace pact {

Json schema_to_json(const ToolSchema& schema) {
  Json j;
  j["tool"] = schema.tool_name;
  if (!schema.description.empty()) j["description"] = schema.description;
  j["args"] = Json::array();
  for (const auto& a : schema.args) {
    Json e;
    e["name"] = a.name;
    e["type"] = a.type;
    e["desc"] = a.desc;
    j["args"].push_back(e);
  }
  j["side_effecting"] = schema.side_effecting;
  j["reads_external"] = schema.reads_external;
  if (!schema.attested.empty()) {
    Json m = Json::object();
    for (const auto& [field, trust] : schema.attested) m[field] = std::string(trust_name(trust));
    j["attested"] = m;
  }
  if (!schema.role_hints.empty()) {
    Json m = Json::object();
    for (const auto& [arg, role] : schema.role_hints) m[arg] = std::string(role_name(role));
    j["role_hints"] = m;
  }
  if (!schema.discharge.empty()) {
    Json m = Json::object();
    for (const auto& [arg, procs] : schema.discharge) m[arg] = procs;
    j["discharge"] = m;
  }
  if (schema.high_integrity) j["high_integrity"] = true;
  return j;
}

ToolSchema schema_from_json(const Json& j) {
  ToolSchema schema;
  schema.tool_name = j.at("tool").get<std::string>();
  schema.description = j.value("description", std::string());
  if (j.contains("args")) {
    for (const auto& e : j.at("args")) {
      SchemaArg a;
      a.name = e.at("name").get<std::string>();
      a.type = e.value("type", std::string());
      a.desc = e.value("desc", std::string());
      schema.args.push_back(std::move(a));
    }
  }
  std::set<std::string> seen;
  for (const auto& a : schema.args) {
    if (!seen.insert(a.name).second) {
      throw ParseError("duplicate argument name in schema for " + schema.tool_name + ": " + a.name);
    }
  }
  schema.side_effecting = j.value("side_effecting", false);
  schema.reads_external = j.value("reads_external", false);
  if (j.contains("attested")) {
    for (auto it = j.at("attested").begin(); it != j.at("attested").end(); ++it) {
      schema.attested[it.key()] = parse_trust(it.value().get<std::string>());
    }
  }
  if (j.contains("role_hints")) {
    for (auto it = j.at("role_hints").begin(); it != j.at("role_hints").end(); ++it) {
      schema.role_hints[it.key()] = parse_role(it.value().get<std::string>());
    }
  }
  if (j.contains("discharge")) {
    for (auto it = j.at("discharge").begin(); it != j.at("discharge").end(); ++it) {
      schema.discharge[it.key()] = it.value().get<std::vector<std::string>>();
    }
  }
  schema.high_integrity = j.value("high_integrity", false);
  return schema;
}

std::vector<RoleRule> role_rules(bool side_effecting) {
  std::vector<RoleRule> rules;
  rules.push_back({{"token", "password", "api_key", "secret", "credential"},
                   ArgRole::Credential, 0});
  {
    RoleRule command{{"command", "shell", "exec", "sql"}, ArgRole::Command, 1};
    if (side_effecting) command.cues.push_back("query");  // mutating query is a command
    rules.push_back(std::move(command));
  }
  rules.push_back({{"recipient", "url", "endpoint", "path", "attendee", "account", "destination"},
                   ArgRole::Target, 2});
  rules.push_back({{"id"}, ArgRole::Selector, 3});
  rules.push_back({{"flag", "mode", "overwrite", "dry_run"}, ArgRole::Control, 4});
  {
    RoleRule content{{"body", "summary", "report", "message", "text", "content", "note", "title"},
                     ArgRole::Content, 5};
    if (!side_effecting) content.cues.push_back("query");  // read-only query is content
    rules.push_back(std::move(content));
  }
  std::stable_sort(rules.begin(), rules.end(),
                   [](const RoleRule& a, const RoleRule& b) { return a.priority < b.priority; });
  return rules;
}

TrustLevel role_default_floor(ArgRole role, bool side_effecting) {
  switch (role) {
    case ArgRole::Credential: return TrustLevel::Trusted;
    case ArgRole::Command: return side_effecting ? TrustLevel::Trusted : TrustLevel::User;
    case ArgRole::Target: return TrustLevel::User;
    case ArgRole::Selector: return TrustLevel::ToolOutput;
    case ArgRole::Control: return TrustLevel::User;
    case ArgRole::Content: return TrustLevel::External;
  }
  return TrustLevel::Trusted;
}

namespace {

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::optional<ArgRole> match_role(const ToolSchema& schema, const SchemaArg& arg) {
  auto hint = schema.role_hints.find(arg.name);
  if (hint != schema.role_hints.end()) return hint->second;
  std::string text = to_lower(arg.name + " " + arg.desc);
  for (const auto& rule : role_rules(schema.side_effecting)) {
    for (const auto& cue : rule.cues) {
      if (text.find(cue) != std::string::npos) return rule.role;
    }
  }
  return std::nullopt;  // no cue fired; caller fails closed
}

OutputSpec default_output_spec(const ToolSchema& schema) {
  OutputSpec spec;
  spec.default_field.trust =
      schema.reads_external ? TrustLevel::External : TrustLevel::ToolOutput;
  spec.default_field.policy = OriginPolicy::ToolOrigin;
  for (const auto& [field, trust] : schema.attested) {
    OutputFieldSpec f;
    f.trust = trust;
    f.policy = OriginPolicy::Attested;
    spec.fields[field] = f;
  }
  return spec;
}

Contract synth_contract(const ToolSchema& schema, Level level) {
  if (schema.tool_name.empty()) throw SchemaError("schema has no tool name");
  Contract contract;
  contract.tool = schema.tool_name;
  contract.level = level;
  contract.capability_floor =
      schema.side_effecting ? TrustLevel::User : TrustLevel::External;
  contract.outputs = default_output_spec(schema);
  for (const auto& arg : schema.args) {
    ArgSpec spec;
    spec.name = arg.name;
    spec.role = match_role(schema, arg);
    if (spec.role.has_value()) {
      spec.trust_floor = role_default_floor(*spec.role, schema.side_effecting);
      if (*spec.role == ArgRole::Selector) spec.authority = false;
      if (*spec.role == ArgRole::Control) spec.authority = true;
    } else {
      spec.trust_floor = TrustLevel::Trusted;  // inert; role checks fail closed first
    }
    if (level == Level::L3) {
      auto procs = schema.discharge.find(arg.name);
      if (procs != schema.discharge.end()) spec.discharge_procedures = procs->second;
    }
    contract.args.push_back(std::move(spec));
  }
  return contract;
}

std::vector<Contract> refinement_chain(const ToolSchema& schema) {
  std::vector<Contract> chain;
  for (Level level : {Level::L0, Level::L1, Level::L2, Level::L3}) {
    chain.push_back(synth_contract(schema, level));
  }
  return chain;
}

std::vector<Contract> chain_from_contract(const Contract& base) {
  std::vector<Contract> chain;
  for (Level level : {Level::L0, Level::L1, Level::L2, Level::L3}) {
    Contract c = base;
    c.level = level;
    chain.push_back(std::move(c));
  }
  return chain;
}

RoleDiff diff_roles(const Contract& draft, const Contract& gold) {
  RoleDiff diff;
  for (const auto& gold_arg : gold.args) {
    ++diff.total;
    const ArgSpec* draft_arg = draft.find_arg(gold_arg.name);
    if (draft_arg != nullptr && draft_arg->role == gold_arg.role) ++diff.matched;
  }
  return diff;
}

}  // namespace pact
