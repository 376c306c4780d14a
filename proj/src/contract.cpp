#include "pact/contract.hpp"

#include <array>

#include "pact/errors.hpp"

namespace pact {

namespace {
constexpr std::array<std::string_view, 4> kLevelNames = {"L0", "L1", "L2", "L3"};
constexpr std::array<std::string_view, 4> kViolationKindNames = {
    "trust_floor", "forbidden_origin", "obligation", "unspecified"};
}  // namespace

std::string_view level_name(Level level) {
  return kLevelNames[static_cast<std::size_t>(level)];
}

Level parse_level(std::string_view name) {
  for (std::size_t i = 0; i < kLevelNames.size(); ++i) {
    if (kLevelNames[i] == name) return static_cast<Level>(i);
  }
  throw ParseError("unknown level: " + std::string(name));
}

std::string_view violation_kind_name(ViolationKind kind) {
  return kViolationKindNames[static_cast<std::size_t>(kind)];
}

bool origin_matches(const std::string& origin, const std::string& pattern) {
  if (!pattern.empty() && pattern.back() == '*') {
    return origin.compare(0, pattern.size() - 1, pattern, 0, pattern.size() - 1) == 0;
  }
  return origin == pattern;
}

const ArgSpec* Contract::find_arg(const std::string& name) const {
  for (const auto& a : args) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

int Contract::arg_index(const std::string& name) const {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::pair<TrustLevel, FloorSource> effective_floor(const Contract& contract, std::size_t arg_index) {
  if (arg_index >= contract.args.size()) {
    throw SchemaMismatch("argument index out of range for " + contract.tool);
  }
  switch (contract.level) {
    case Level::L0:
      return {kTrustTop, FloorSource::L0Global};
    case Level::L1:
      return {contract.capability_floor, FloorSource::L1Capability};
    case Level::L2:
    case Level::L3: {
      const ArgSpec& spec = contract.args[arg_index];
      if (spec.unspecified()) return {kTrustTop, FloorSource::L2Role};
      return {spec.trust_floor, FloorSource::L2Role};
    }
  }
  return {kTrustTop, FloorSource::L0Global};
}

void ProcedureRegistry::register_procedure(const TrustedProcedure& proc) {
  auto it = procedures.find(proc.name);
  if (it != procedures.end() && it->second.cert_trust != proc.cert_trust) {
    throw ParseError("procedure re-registered with different cert_trust: " + proc.name);
  }
  procedures[proc.name] = proc;
}

const TrustedProcedure* ProcedureRegistry::find(const std::string& name) const {
  auto it = procedures.find(name);
  return it == procedures.end() ? nullptr : &it->second;
}

TaggedValue apply_discharge(const TaggedValue& v, const DischargeCertificate& cert,
                            const TrustedProcedure& proc) {
  if (cert.bound_value_id != v.value_id) {
    throw CertMismatch("certificate " + cert.cert_id + " bound to " + cert.bound_value_id +
                       ", not " + v.value_id);
  }
  if (cert.procedure != proc.name) {
    throw CertMismatch("certificate " + cert.cert_id + " names procedure " + cert.procedure +
                       ", not " + proc.name);
  }
  if (cert.role_scope.empty()) {
    throw CertMismatch("certificate " + cert.cert_id + " has empty role scope");
  }
  TaggedValue out = v;
  out.value_id = v.value_id + "+" + cert.cert_id;
  out.tag.origins.insert(proc.origin());
  out.tag.trust = trust_min(cert.max_trust, proc.cert_trust);
  Obligation key{cert.predicate, {}};
  out.tag.obligations.erase(key);

  DischargeRestriction restriction;
  restriction.role_scope = cert.role_scope;
  restriction.prior_trust = v.tag.trust;
  restriction.prior_obligations = v.tag.obligations;
  out.restriction = restriction;
  return out;
}

TaggedValue apply_discharge(const TaggedValue& v, const DischargeCertificate& cert,
                            const TrustedProcedure& proc,
                            const std::set<std::string>& consumed) {
  if (consumed.count(cert.cert_id) > 0) {
    throw CertConsumed("certificate " + cert.cert_id + " already spent");
  }
  return apply_discharge(v, cert, proc);
}

bool cert_covers(const DischargeCertificate& cert, ViolationKind failed,
                 const std::string& failed_predicate, ArgRole role, const ArgSpec& spec) {
  if (failed == ViolationKind::Unspecified) return false;
  std::string predicate = failed == ViolationKind::Obligation
                              ? failed_predicate
                              : std::string(violation_kind_name(failed));
  if (cert.predicate != predicate) return false;
  if (cert.role_scope.count(role) == 0) return false;
  for (const auto& proc : spec.discharge_procedures) {
    if (proc == cert.procedure) return true;
  }
  return false;
}

bool is_safe_refinement(const Contract& coarse, const Contract& fine,
                        const ProcedureRegistry& registry) {
  if (coarse.tool != fine.tool) {
    throw SchemaMismatch("refinement across tools: " + coarse.tool + " vs " + fine.tool);
  }
  if (coarse.args.size() != fine.args.size()) {
    throw SchemaMismatch("refinement across arities for " + coarse.tool);
  }
  for (std::size_t i = 0; i < coarse.args.size(); ++i) {
    if (coarse.args[i].name != fine.args[i].name) {
      throw SchemaMismatch("argument name mismatch at position " + std::to_string(i) +
                           " for " + coarse.tool);
    }
  }
  if (static_cast<int>(fine.level) < static_cast<int>(coarse.level)) return false;
  for (std::size_t i = 0; i < coarse.args.size(); ++i) {
    const ArgSpec& c = coarse.args[i];
    const ArgSpec& f = fine.args[i];
    if (!c.authority_bearing()) continue;
    if (!trust_leq(c.trust_floor, f.trust_floor)) return false;
    for (const auto& pattern : c.forbidden_origins) {
      bool kept = false;
      for (const auto& fp : f.forbidden_origins) {
        if (fp == pattern) { kept = true; break; }
      }
      if (!kept) return false;
    }
    for (const auto& proc : f.discharge_procedures) {
      bool pre_existing = false;
      for (const auto& cp : c.discharge_procedures) {
        if (cp == proc) { pre_existing = true; break; }
      }
      if (!pre_existing && registry.find(proc) == nullptr) return false;
    }
  }
  return true;
}

Json contract_to_json(const Contract& contract) {
  Json j;
  j["tool"] = contract.tool;
  j["level"] = std::string(level_name(contract.level));
  j["capability_floor"] = std::string(trust_name(contract.capability_floor));
  j["args"] = Json::array();
  for (const auto& spec : contract.args) {
    Json a;
    a["name"] = spec.name;
    a["role"] = spec.role ? std::string(role_name(*spec.role)) : "UNSPECIFIED";
    if (spec.role) {
      a["trust_floor"] = std::string(trust_name(spec.trust_floor));
      if (*spec.role == ArgRole::Selector || *spec.role == ArgRole::Control) {
        a["authority"] = spec.authority;
      }
      a["forbidden_origins"] = spec.forbidden_origins;
      a["required_obligations"] = spec.required_obligations;
      a["discharge"] = spec.discharge_procedures;
      if (!spec.floor_justification.empty()) a["floor_justification"] = spec.floor_justification;
    }
    j["args"].push_back(a);
  }
  Json out;
  auto field_json = [](const OutputFieldSpec& f) {
    Json e;
    e["trust"] = std::string(trust_name(f.trust));
    switch (f.policy) {
      case OriginPolicy::ToolOrigin: e["origin_policy"] = "tool_origin"; break;
      case OriginPolicy::Passthrough: e["origin_policy"] = "passthrough"; break;
      case OriginPolicy::Attested: e["origin_policy"] = "attested"; break;
    }
    if (!f.flows_from.empty()) e["flows_from"] = f.flows_from;
    return e;
  };
  out["default"] = field_json(contract.outputs.default_field);
  for (const auto& [name, field] : contract.outputs.fields) {
    out[name] = field_json(field);
  }
  j["output_spec"] = out;
  return j;
}

namespace {

OutputFieldSpec output_field_from_json(const Json& j) {
  OutputFieldSpec f;
  f.trust = parse_trust(j.at("trust").get<std::string>());
  std::string policy = j.value("origin_policy", std::string("tool_origin"));
  if (policy == "tool_origin") {
    f.policy = OriginPolicy::ToolOrigin;
  } else if (policy == "passthrough") {
    f.policy = OriginPolicy::Passthrough;
  } else if (policy == "attested") {
    f.policy = OriginPolicy::Attested;
  } else {
    throw ParseError("unknown origin_policy: " + policy);
  }
  if (j.contains("flows_from")) {
    for (const auto& a : j.at("flows_from")) f.flows_from.push_back(a.get<std::string>());
  }
  return f;
}

}  // namespace

Contract contract_from_json(const Json& j) {
  Contract c;
  c.tool = j.at("tool").get<std::string>();
  if (c.tool.empty()) throw ParseError("contract tool name must be non-empty");
  c.level = parse_level(j.at("level").get<std::string>());
  c.capability_floor = parse_trust(j.at("capability_floor").get<std::string>());
  for (const auto& a : j.at("args")) {
    ArgSpec spec;
    spec.name = a.at("name").get<std::string>();
    std::string role = a.value("role", std::string("UNSPECIFIED"));
    if (role != "UNSPECIFIED") {
      spec.role = parse_role(role);
      spec.trust_floor = parse_trust(a.at("trust_floor").get<std::string>());
      if (*spec.role == ArgRole::Selector || *spec.role == ArgRole::Control) {
        // The authority flag has no tool-independent default for these roles.
        if (!a.contains("authority")) {
          throw ParseError("SELECTOR/CONTROL arg '" + spec.name +
                           "' requires an explicit authority flag");
        }
        spec.authority = a.at("authority").get<bool>();
      }
      if (a.contains("forbidden_origins")) {
        for (const auto& p : a.at("forbidden_origins")) {
          spec.forbidden_origins.push_back(p.get<std::string>());
        }
      }
      if (a.contains("required_obligations")) {
        for (const auto& p : a.at("required_obligations")) {
          spec.required_obligations.push_back(p.get<std::string>());
        }
      }
      if (a.contains("discharge")) {
        for (const auto& p : a.at("discharge")) {
          spec.discharge_procedures.push_back(p.get<std::string>());
        }
      }
      spec.floor_justification = a.value("floor_justification", std::string());
      if (*spec.role == ArgRole::Credential && spec.trust_floor != TrustLevel::Trusted &&
          spec.floor_justification.empty()) {
        throw ParseError("CREDENTIAL arg '" + spec.name +
                         "' requires floor TRUSTED or a floor_justification");
      }
    }
    c.args.push_back(std::move(spec));
  }
  if (j.contains("output_spec")) {
    const Json& out = j.at("output_spec");
    for (auto it = out.begin(); it != out.end(); ++it) {
      if (it.key() == "default") {
        c.outputs.default_field = output_field_from_json(it.value());
      } else {
        c.outputs.fields[it.key()] = output_field_from_json(it.value());
      }
    }
  }
  return c;
}

Json certificate_to_json(const DischargeCertificate& cert) {
  Json j;
  j["cert_id"] = cert.cert_id;
  j["predicate"] = cert.predicate;
  j["procedure"] = cert.procedure;
  j["role_scope"] = Json::array();
  for (ArgRole r : cert.role_scope) j["role_scope"].push_back(std::string(role_name(r)));
  j["max_trust"] = std::string(trust_name(cert.max_trust));
  j["bound_value_id"] = cert.bound_value_id;
  return j;
}

DischargeCertificate certificate_from_json(const Json& j) {
  DischargeCertificate cert;
  cert.cert_id = j.at("cert_id").get<std::string>();
  cert.predicate = j.at("predicate").get<std::string>();
  cert.procedure = j.at("procedure").get<std::string>();
  for (const auto& r : j.at("role_scope")) cert.role_scope.insert(parse_role(r.get<std::string>()));
  if (cert.role_scope.empty()) throw ParseError("certificate role_scope must be non-empty");
  cert.max_trust = parse_trust(j.at("max_trust").get<std::string>());
  cert.bound_value_id = j.at("bound_value_id").get<std::string>();
  return cert;
}

}  // namespace pact
