#include "pact/monitor.hpp"

#include <algorithm>
#include <cctype>

#include "pact/errors.hpp"

namespace pact {

std::string_view decision_name(Decision d) {
  return d == Decision::Allow ? "ALLOW" : "BLOCK";
}

Decision parse_decision(std::string_view name) {
  if (name == "ALLOW") return Decision::Allow;
  if (name == "BLOCK") return Decision::Block;
  throw ParseError("unknown decision: " + std::string(name));
}

Json verdict_to_json(const Verdict& v) {
  Json j;
  j["decision"] = std::string(decision_name(v.decision));
  j["violations"] = Json::array();
  for (const auto& vio : v.violations) {
    Json e;
    e["arg"] = vio.arg;
    e["kind"] = std::string(violation_kind_name(vio.kind));
    switch (vio.kind) {
      case ViolationKind::TrustFloor:
        e["observed"] = std::string(trust_name(vio.observed));
        e["required"] = std::string(trust_name(vio.required));
        break;
      case ViolationKind::ForbiddenOrigin:
        e["origin"] = vio.origin;
        e["pattern"] = vio.pattern;
        break;
      case ViolationKind::Obligation:
        e["missing"] = vio.missing;
        break;
      case ViolationKind::Unspecified:
        e["reason"] = vio.reason;
        break;
    }
    j["violations"].push_back(e);
  }
  j["discharges"] = Json::array();
  for (const auto& d : v.discharges) {
    Json e;
    e["arg"] = d.arg;
    e["certificate"] = d.cert_id;
    j["discharges"].push_back(e);
  }
  return j;
}

Verdict verdict_from_json(const Json& j) {
  Verdict v;
  v.decision = parse_decision(j.at("decision").get<std::string>());
  for (const auto& e : j.at("violations")) {
    Violation vio;
    vio.arg = e.at("arg").get<std::string>();
    std::string kind = e.at("kind").get<std::string>();
    if (kind == "trust_floor") {
      vio.kind = ViolationKind::TrustFloor;
      vio.observed = parse_trust(e.at("observed").get<std::string>());
      vio.required = parse_trust(e.at("required").get<std::string>());
    } else if (kind == "forbidden_origin") {
      vio.kind = ViolationKind::ForbiddenOrigin;
      vio.origin = e.at("origin").get<std::string>();
      vio.pattern = e.at("pattern").get<std::string>();
    } else if (kind == "obligation") {
      vio.kind = ViolationKind::Obligation;
      vio.missing = e.at("missing").get<std::string>();
    } else if (kind == "unspecified") {
      vio.kind = ViolationKind::Unspecified;
      vio.reason = e.at("reason").get<std::string>();
    } else {
      throw ParseError("unknown violation kind: " + kind);
    }
    v.violations.push_back(std::move(vio));
  }
  if (j.contains("discharges")) {
    for (const auto& e : j.at("discharges")) {
      DischargeApplied d;
      d.arg = e.at("arg").get<std::string>();
      d.cert_id = e.at("certificate").get<std::string>();
      v.discharges.push_back(std::move(d));
    }
  }
  return v;
}

Json call_to_json(const ToolCall& call) {
  Json j;
  j["tool"] = call.tool_name;
  j["call_index"] = call.call_index;
  j["args"] = Json::array();
  for (const auto& v : call.args) j["args"].push_back(value_to_json(v));
  return j;
}

ToolCall call_from_json(const Json& j) {
  ToolCall call;
  call.tool_name = j.at("tool").get<std::string>();
  call.call_index = j.value("call_index", 0);
  if (j.contains("args")) {
    for (const auto& a : j.at("args")) call.args.push_back(value_from_json(a));
  }
  return call;
}

int ProvenanceState::next_index(const std::string& name) {
  return ++counters[name];
}

const TaggedValue& ProvenanceState::value(const std::string& id) const {
  auto it = values.find(id);
  if (it == values.end()) throw ScenarioError("unknown value id: " + id);
  return it->second;
}

void ProvenanceState::insert_value(const TaggedValue& v) {
  if (values.count(v.value_id) > 0) {
    throw DuplicateOrigin("value id already recorded this session: " + v.value_id);
  }
  values[v.value_id] = v;
  // Origins introduced by EXTERNAL-trust events feed sink policy (a).
  if (v.producer_trust == TrustLevel::External && !v.producer_origin.empty()) {
    external_origins.insert(v.producer_origin);
  }
}

Json state_to_json(const ProvenanceState& state) {
  Json j;
  j["values"] = Json::array();
  for (const auto& [id, v] : state.values) j["values"].push_back(value_to_json(v));
  j["discharged"] = Json::array();
  for (const auto& [id, pred] : state.discharged) {
    j["discharged"].push_back(Json::array({id, pred}));
  }
  j["history"] = Json::array();
  for (const auto& entry : state.history) {
    Json e;
    e["call"] = call_to_json(entry.call);
    e["verdict"] = verdict_to_json(entry.verdict);
    e["outputs"] = entry.output_ids;
    j["history"].push_back(e);
  }
  j["consumed_certs"] = Json::array();
  for (const auto& id : state.consumed_certs) j["consumed_certs"].push_back(id);
  j["external_origins"] = Json::array();
  for (const auto& o : state.external_origins) j["external_origins"].push_back(o);
  j["counters"] = Json::object();
  for (const auto& [name, n] : state.counters) j["counters"][name] = n;
  return j;
}

ProvenanceState state_from_json(const Json& j) {
  ProvenanceState state;
  for (const auto& v : j.at("values")) {
    TaggedValue value = value_from_json(v);
    state.values[value.value_id] = value;
  }
  for (const auto& d : j.at("discharged")) {
    state.discharged.insert({d.at(0).get<std::string>(), d.at(1).get<std::string>()});
  }
  for (const auto& e : j.at("history")) {
    HistoryEntry entry;
    entry.call = call_from_json(e.at("call"));
    entry.verdict = verdict_from_json(e.at("verdict"));
    for (const auto& id : e.at("outputs")) entry.output_ids.push_back(id.get<std::string>());
    state.history.push_back(std::move(entry));
  }
  for (const auto& id : j.at("consumed_certs")) state.consumed_certs.insert(id.get<std::string>());
  for (const auto& o : j.at("external_origins")) state.external_origins.insert(o.get<std::string>());
  for (auto it = j.at("counters").begin(); it != j.at("counters").end(); ++it) {
    state.counters[it.key()] = it.value().get<int>();
  }
  return state;
}

namespace {

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool credential_named(const std::string& arg_name, const PolicyConfig& policies) {
  std::string lowered = to_lower(arg_name);
  for (const auto& cue : policies.credential_cues) {
    if (lowered.find(cue) != std::string::npos) return true;
  }
  return false;
}

void bump(CheckStats* stats, std::size_t n = 1) {
  if (stats) stats->ops += n;
}

// All failed predicates for one argument binding. `pending` carries in-flight
// discharge records so a certificate's effect is visible to its own re-check.
std::vector<Violation> argument_violations(
    const TaggedValue& value, const ArgSpec& spec, const Contract& contract,
    std::size_t arg_index, const ProvenanceState& state, const PolicyConfig& policies,
    const std::set<std::pair<std::string, std::string>>& pending, CheckStats* stats) {
  std::vector<Violation> out;
  bump(stats);
  bool role_checks = contract.level == Level::L2 || contract.level == Level::L3;

  if (role_checks && spec.unspecified()) {
    Violation v;
    v.arg = spec.name;
    v.kind = ViolationKind::Unspecified;
    v.reason = "no specification for this argument; failing closed";
    out.push_back(std::move(v));
    return out;
  }

  ProvenanceTag tag = value.effective_tag(spec.role);
  auto [floor, floor_source] = effective_floor(contract, arg_index);
  (void)floor_source;
  if (!meets_floor(tag, floor)) {
    Violation v;
    v.arg = spec.name;
    v.kind = ViolationKind::TrustFloor;
    v.observed = tag.trust;
    v.required = floor;
    out.push_back(std::move(v));
  }

  if (role_checks) {
    for (const auto& origin : tag.origins) {
      bump(stats);
      for (const auto& pattern : spec.forbidden_origins) {
        if (origin_matches(origin, pattern)) {
          Violation v;
          v.arg = spec.name;
          v.kind = ViolationKind::ForbiddenOrigin;
          v.origin = origin;
          v.pattern = pattern;
          out.push_back(std::move(v));
          break;
        }
      }
    }

    auto discharged = [&](const std::string& predicate) {
      bump(stats);
      std::pair<std::string, std::string> key{value.value_id, predicate};
      return state.discharged.count(key) > 0 || pending.count(key) > 0;
    };
    std::set<std::string> missing;
    for (const auto& predicate : spec.required_obligations) {
      if (!discharged(predicate)) missing.insert(predicate);
    }
    for (const auto& ob : tag.obligations) {
      bump(stats);
      if (!ob.applies_to(*spec.role)) continue;
      if (!discharged(ob.predicate)) missing.insert(ob.predicate);
    }
    for (const auto& predicate : missing) {
      Violation v;
      v.arg = spec.name;
      v.kind = ViolationKind::Obligation;
      v.missing = predicate;
      out.push_back(std::move(v));
    }
  }

  if (policies.enabled) {
    if (policies.sink_tools.count(contract.tool) > 0) {
      for (const auto& origin : tag.origins) {
        bump(stats);
        if (state.external_origins.count(origin) > 0) {
          Violation v;
          v.arg = spec.name;
          v.kind = ViolationKind::ForbiddenOrigin;
          v.origin = origin;
          v.pattern = "policy:external-origin-at-sink";
          out.push_back(std::move(v));
        }
      }
    }
    if (credential_named(spec.name, policies) && tag.trust != TrustLevel::Trusted) {
      bool already_floored = std::any_of(out.begin(), out.end(), [](const Violation& v) {
        return v.kind == ViolationKind::TrustFloor;
      });
      if (!already_floored) {
        Violation v;
        v.arg = spec.name;
        v.kind = ViolationKind::TrustFloor;
        v.observed = tag.trust;
        v.required = TrustLevel::Trusted;
        out.push_back(std::move(v));
      }
    }
  }
  return out;
}

std::string violation_predicate(const Violation& v) {
  return v.kind == ViolationKind::Obligation ? v.missing
                                             : std::string(violation_kind_name(v.kind));
}

}  // namespace

Verdict check_call(const ToolCall& call, const Contract& contract, const ProvenanceState& state,
                   const std::vector<DischargeCertificate>& certs,
                   const ProcedureRegistry& procs, const PolicyConfig& policies,
                   CheckStats* stats) {
  if (call.args.size() != contract.args.size()) {
    throw SchemaMismatch("call to " + call.tool_name + " has " +
                         std::to_string(call.args.size()) + " args, contract declares " +
                         std::to_string(contract.args.size()));
  }
  Verdict verdict;
  std::set<std::pair<std::string, std::string>> pending;
  for (std::size_t i = 0; i < call.args.size(); ++i) {
    const ArgSpec& spec = contract.args[i];
    const TaggedValue& value = call.args[i];
    std::vector<Violation> vio =
        argument_violations(value, spec, contract, i, state, policies, pending, stats);

    if (!vio.empty() && contract.level == Level::L3 && !spec.unspecified()) {
      // One certificate discharges one predicate; an argument is coverable
      // only when all its failures name that same predicate.
      std::string predicate = violation_predicate(vio.front());
      bool uniform = std::all_of(vio.begin(), vio.end(), [&](const Violation& v) {
        return violation_predicate(v) == predicate;
      });
      if (uniform) {
        for (const auto& cert : certs) {
          bump(stats);
          if (state.consumed_certs.count(cert.cert_id) > 0) continue;
          if (cert.bound_value_id != value.value_id) continue;
          if (!cert_covers(cert, vio.front().kind, predicate, *spec.role, spec)) continue;
          const TrustedProcedure* proc = procs.find(cert.procedure);
          if (proc == nullptr) continue;
          TaggedValue derived = apply_discharge(value, cert, *proc);
          auto overlay = pending;
          overlay.insert({value.value_id, cert.predicate});
          overlay.insert({derived.value_id, cert.predicate});
          std::vector<Violation> recheck =
              argument_violations(derived, spec, contract, i, state, policies, overlay, stats);
          if (!recheck.empty()) continue;  // discharge would not clear the argument
          pending = std::move(overlay);
          DischargeApplied record;
          record.arg = spec.name;
          record.cert_id = cert.cert_id;
          record.predicate = cert.predicate;
          record.value_id = value.value_id;
          record.derived_value_id = derived.value_id;
          verdict.discharges.push_back(std::move(record));
          vio.clear();
          break;
        }
      }
    }
    for (auto& v : vio) verdict.violations.push_back(std::move(v));
  }
  verdict.decision = verdict.violations.empty() ? Decision::Allow : Decision::Block;
  return verdict;
}

std::vector<TaggedValue> tag_outputs(const ToolCall& call, const Contract& contract,
                                     const Json& raw_outputs) {
  std::vector<TaggedValue> result;
  if (raw_outputs.is_null()) return result;
  Json outs = raw_outputs;
  if (!outs.is_object()) {
    Json wrapped;
    wrapped["result"] = outs;
    outs = wrapped;
  }
  std::string self_origin = "tool:" + call.tool_name + "#" + std::to_string(call.call_index);
  for (auto it = outs.begin(); it != outs.end(); ++it) {
    const OutputFieldSpec& field = contract.outputs.for_field(it.key());
    ProvenanceTag base;
    bool any_input = false;
    for (std::size_t i = 0; i < call.args.size(); ++i) {
      if (!field.flows_from.empty()) {
        const std::string& arg_name =
            i < contract.args.size() ? contract.args[i].name : std::string();
        if (std::find(field.flows_from.begin(), field.flows_from.end(), arg_name) ==
            field.flows_from.end()) {
          continue;
        }
      }
      ProvenanceTag t = call.args[i].effective_tag(std::nullopt);
      base = any_input ? merge(base, t) : t;
      any_input = true;
    }
    ProvenanceTag tag;
    tag.origins = any_input ? base.origins : std::set<std::string>{};
    tag.origins.insert(self_origin);
    tag.obligations = any_input ? base.obligations : std::set<Obligation>{};
    tag.trust = field.policy == OriginPolicy::Passthrough && any_input ? base.trust : field.trust;

    TaggedValue v;
    v.value_id = self_origin + "." + it.key();
    v.payload = it.value();
    v.tag = tag;
    v.producer_origin = self_origin;
    v.producer_trust = field.trust;
    result.push_back(std::move(v));
  }
  return result;
}

Verdict flat_check(const ToolCall& call, const FlatPolicy& policy) {
  Verdict verdict;
  if (!policy.is_high(call.tool_name)) return verdict;
  bool below = false;
  TrustLevel lowest = kTrustTop;
  for (const auto& arg : call.args) {
    TrustLevel t = arg.effective_tag(std::nullopt).trust;
    if (!trust_leq(policy.high_threshold, t)) {
      below = true;
      lowest = trust_min(lowest, t);
    }
  }
  if (below) {
    Violation v;
    v.arg = "*";
    v.kind = ViolationKind::TrustFloor;
    v.observed = lowest;
    v.required = policy.high_threshold;
    verdict.violations.push_back(std::move(v));
    verdict.decision = Decision::Block;
  }
  return verdict;
}

Verdict per_arg_uniform_check(const ToolCall& call, TrustLevel floor) {
  Verdict verdict;
  for (std::size_t i = 0; i < call.args.size(); ++i) {
    TrustLevel t = call.args[i].effective_tag(std::nullopt).trust;
    if (!trust_leq(floor, t)) {
      Violation v;
      v.arg = "#" + std::to_string(i);
      v.kind = ViolationKind::TrustFloor;
      v.observed = t;
      v.required = floor;
      verdict.violations.push_back(std::move(v));
    }
  }
  verdict.decision = verdict.violations.empty() ? Decision::Allow : Decision::Block;
  return verdict;
}

Verdict no_crossstep_check(const ToolCall& call, const Contract& contract,
                           const ProvenanceState& state, const ProcedureRegistry& procs,
                           const PolicyConfig& policies) {
  ToolCall snapshot = call;
  for (auto& v : snapshot.args) {
    if (v.producer_origin.empty()) continue;  // no producer record; keep the full tag
    ProvenanceTag t;
    t.origins.insert(v.producer_origin);
    t.trust = v.producer_trust;
    t.obligations = v.tag.obligations;
    v.tag = t;
    v.restriction.reset();
  }
  return check_call(snapshot, contract, state, {}, procs, policies);
}

TaggedValue Session::inject_user(const Json& payload, const std::string& id_hint) {
  std::string id = id_hint.empty()
                       ? "user:u" + std::to_string(state.next_index("user"))
                       : "user:" + id_hint;
  TaggedValue v;
  v.value_id = id;
  v.payload = payload;
  v.tag = make_source_tag(SourceKind::User, id);
  v.producer_origin = id;
  v.producer_trust = TrustLevel::User;
  state.insert_value(v);
  return v;
}

TaggedValue Session::inject_constant(const std::string& name, const Json& payload) {
  std::string id = "const:" + name;
  TaggedValue v;
  v.value_id = id;
  v.payload = payload;
  v.tag = make_source_tag(SourceKind::TrustedConstant, id);
  v.producer_origin = id;
  v.producer_trust = TrustLevel::Trusted;
  state.insert_value(v);
  return v;
}

std::vector<TaggedValue> Session::inject_external(const std::string& source, const Json& payload,
                                                  const std::string& origin_kind) {
  int k = state.next_index(source);
  std::string base = origin_kind + ":" + source + "#" + std::to_string(k);
  std::vector<TaggedValue> out;
  auto add = [&](const std::string& id, const Json& field_payload) {
    TaggedValue v;
    v.value_id = id;
    v.payload = field_payload;
    v.tag = make_source_tag(SourceKind::External, base);
    v.producer_origin = base;
    v.producer_trust = TrustLevel::External;
    state.insert_value(v);
    out.push_back(std::move(v));
  };
  if (payload.is_object()) {
    for (auto it = payload.begin(); it != payload.end(); ++it) {
      add(base + "." + it.key(), it.value());
    }
  } else {
    add(base, payload);
  }
  return out;
}

void Session::issue_certificate(const DischargeCertificate& cert) {
  for (const auto& existing : certificates) {
    if (existing.cert_id == cert.cert_id) {
      throw ParseError("certificate id already issued: " + cert.cert_id);
    }
  }
  certificates.push_back(cert);
}

Verdict evaluate_call(const ToolCall& call, const Contract* contract,
                      const ProvenanceState& state, const MonitorKind& monitor,
                      const std::vector<DischargeCertificate>& certs,
                      const ProcedureRegistry& procs, const PolicyConfig& policies) {
  Verdict verdict;
  if (contract == nullptr &&
      (monitor.family == MonitorKind::Family::Pact ||
       monitor.family == MonitorKind::Family::NoCrossstep)) {
    Violation v;
    v.arg = "*";
    v.kind = ViolationKind::Unspecified;
    v.reason = "unregistered tool: " + call.tool_name + "; failing closed";
    verdict.violations.push_back(std::move(v));
    verdict.decision = Decision::Block;
    return verdict;
  }
  switch (monitor.family) {
    case MonitorKind::Family::Vanilla:
      break;
    case MonitorKind::Family::Pact:
      verdict = check_call(call, *contract, state, certs, procs, policies);
      break;
    case MonitorKind::Family::Flat:
      verdict = flat_check(call, monitor.flat);
      break;
    case MonitorKind::Family::PerArgUniform:
      verdict = per_arg_uniform_check(call, monitor.uniform_floor);
      break;
    case MonitorKind::Family::NoCrossstep:
      verdict = no_crossstep_check(call, *contract, state, procs, policies);
      break;
  }
  return verdict;
}

Verdict Session::run_call(const std::string& tool, std::vector<TaggedValue> args,
                          const Json& scripted_outputs) {
  ToolCall call;
  call.tool_name = tool;
  call.args = std::move(args);
  call.call_index = state.next_index(tool);

  auto it = contracts.find(tool);
  const Contract* contract = it == contracts.end() ? nullptr : &it->second;

  Verdict verdict;
  if (contract == nullptr) {
    Violation v;
    v.arg = "*";
    v.kind = ViolationKind::Unspecified;
    v.reason = "unregistered tool: " + tool + "; failing closed";
    verdict.violations.push_back(std::move(v));
    verdict.decision = Decision::Block;
  } else {
    verdict = evaluate_call(call, contract, state, monitor, certificates, procedures, policies);
  }

  HistoryEntry entry;
  entry.call = call;
  entry.verdict = verdict;

  if (verdict.decision == Decision::Allow) {
    for (const auto& d : verdict.discharges) {
      // Recompute the derived value; apply_discharge is deterministic.
      const DischargeCertificate* cert = nullptr;
      for (const auto& c : certificates) {
        if (c.cert_id == d.cert_id) { cert = &c; break; }
      }
      const TaggedValue* original = nullptr;
      for (const auto& a : call.args) {
        if (a.value_id == d.value_id) { original = &a; break; }
      }
      if (cert != nullptr && original != nullptr) {
        if (const TrustedProcedure* proc = procedures.find(cert->procedure)) {
          TaggedValue derived = apply_discharge(*original, *cert, *proc);
          if (!state.has_value(derived.value_id)) state.insert_value(derived);
        }
      }
      state.discharged.insert({d.value_id, d.predicate});
      state.discharged.insert({d.derived_value_id, d.predicate});
      state.consumed_certs.insert(d.cert_id);
    }
  }

  // Scripted-trace replay: outputs are recorded regardless of the verdict so
  // a fixed trace yields comparable verdicts across monitors and levels.
  if (contract != nullptr && (replay_outputs || verdict.decision == Decision::Allow)) {
    for (auto& v : tag_outputs(call, *contract, scripted_outputs)) {
      entry.output_ids.push_back(v.value_id);
      state.insert_value(v);
    }
  }

  state.history.push_back(std::move(entry));
  if (audit) {
    Json line;
    line["tool"] = tool;
    line["call_index"] = call.call_index;
    line["verdict"] = verdict_to_json(verdict);
    audit(line.dump());
  }
  return verdict;
}

}  // namespace pact
