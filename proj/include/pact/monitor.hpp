#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pact/contract.hpp"
#include "pact/provenance.hpp"

namespace pact {

enum class Decision : std::uint8_t { Allow, Block };

std::string_view decision_name(Decision d);
Decision parse_decision(std::string_view name);

struct Violation {
  std::string arg;
  ViolationKind kind = ViolationKind::TrustFloor;
  // Kind-specific detail; unused fields stay empty.
  TrustLevel observed = kTrustBottom;   // trust_floor
  TrustLevel required = kTrustBottom;   // trust_floor
  std::string origin;                   // forbidden_origin
  std::string pattern;                  // forbidden_origin
  std::string missing;                  // obligation
  std::string reason;                   // unspecified
};

struct DischargeApplied {
  std::string arg;
  std::string cert_id;
  std::string predicate;
  std::string value_id;          // pre-discharge value the record is keyed by
  std::string derived_value_id;
};

struct Verdict {
  Decision decision = Decision::Allow;
  std::vector<Violation> violations;          // non-empty iff Block
  std::vector<DischargeApplied> discharges;
};

Json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const Json& j);

struct ToolCall {
  std::string tool_name;
  std::vector<TaggedValue> args;  // ordered per the contract
  int call_index = 0;             // per-tool invocation number
};

Json call_to_json(const ToolCall& call);
ToolCall call_from_json(const Json& j);

// Defence-in-depth rules evaluated after role checks, independent of level:
// (a) values carrying an external-classified origin never bind arguments of
//     sink-listed tools, (b) credential-named arguments always need TRUSTED.
struct PolicyConfig {
  bool enabled = false;
  std::set<std::string> sink_tools;
  std::vector<std::string> credential_cues = {"api_key", "token", "password", "secret"};
};

struct HistoryEntry {
  ToolCall call;
  Verdict verdict;
  std::vector<std::string> output_ids;
};

// Elementary-operation counter for the linearity assertion on check_call.
struct CheckStats {
  std::size_t ops = 0;
};

struct ProvenanceState {
  std::map<std::string, TaggedValue> values;
  std::set<std::pair<std::string, std::string>> discharged;  // (value_id, predicate)
  std::vector<HistoryEntry> history;                          // append-only
  std::set<std::string> consumed_certs;
  // Origins introduced by EXTERNAL-trust events; drives sink policy (a).
  std::set<std::string> external_origins;
  std::map<std::string, int> counters;  // per source/tool name

  int next_index(const std::string& name);
  const TaggedValue& value(const std::string& id) const;  // throws ScenarioError
  bool has_value(const std::string& id) const { return values.count(id) > 0; }
  // Throws DuplicateOrigin when the id already names a session value.
  void insert_value(const TaggedValue& v);
};

Json state_to_json(const ProvenanceState& state);
ProvenanceState state_from_json(const Json& j);

// Algorithm-1 check: per-argument trust-floor / forbidden-origin / obligation
// predicates with L3 certificate discharge. BLOCK verdicts report every failed
// predicate across all arguments. Pure in (call, contract, state).
// Throws SchemaMismatch on arity mismatch.
Verdict check_call(const ToolCall& call, const Contract& contract, const ProvenanceState& state,
                   const std::vector<DischargeCertificate>& certs,
                   const ProcedureRegistry& procs, const PolicyConfig& policies = {},
                   CheckStats* stats = nullptr);

// Tags scripted outputs for an allowed (or replayed) call. Every field
// accumulates the flowing arguments' origins/obligations plus the producing
// `tool:<name>#<call_index>` origin; trust per the field's OutputFieldSpec.
std::vector<TaggedValue> tag_outputs(const ToolCall& call, const Contract& contract,
                                     const Json& raw_outputs);

struct FlatPolicy {
  std::map<std::string, bool> high;  // tool -> lambda_t == HIGH
  TrustLevel high_threshold = TrustLevel::User;

  bool is_high(const std::string& tool) const {
    auto it = high.find(tool);
    return it != high.end() && it->second;
  }
};

// Tool-level baseline: BLOCK iff the tool is labeled HIGH and some argument
// trust sits below the threshold. Single synthetic violation on the whole
// call.
Verdict flat_check(const ToolCall& call, const FlatPolicy& policy);

// Uniform per-argument floor; violations attributed per argument.
Verdict per_arg_uniform_check(const ToolCall& call, TrustLevel floor);

// Ablation: identical predicates but every argument's tag is rebuilt from its
// immediate producer alone, discarding accumulated origins.
Verdict no_crossstep_check(const ToolCall& call, const Contract& contract,
                           const ProvenanceState& state, const ProcedureRegistry& procs,
                           const PolicyConfig& policies = {});

// Which check a session applies before recording a call.
struct MonitorKind {
  enum class Family : std::uint8_t { Vanilla, Pact, Flat, PerArgUniform, NoCrossstep };
  Family family = Family::Pact;
  FlatPolicy flat;
  TrustLevel uniform_floor = TrustLevel::User;
};

// The monitor-family dispatch used by Session::run_call, exposed so a
// serialized state snapshot can be re-checked independently. `contract` may
// be null only for Vanilla/Flat/PerArgUniform families.
Verdict evaluate_call(const ToolCall& call, const Contract* contract,
                      const ProvenanceState& state, const MonitorKind& monitor,
                      const std::vector<DischargeCertificate>& certs,
                      const ProcedureRegistry& procs, const PolicyConfig& policies);

// Single-writer session: owns the provenance state, contract registry and
// certificate store; appends one history entry per call. Outputs are tagged
// with full-fidelity provenance regardless of the verdict so that a fixed
// trace yields comparable verdicts across monitors and levels.
class Session {
 public:
  std::map<std::string, Contract> contracts;
  ProcedureRegistry procedures;
  std::vector<DischargeCertificate> certificates;  // tried in registration order
  PolicyConfig policies;
  MonitorKind monitor;
  ProvenanceState state;
  std::function<void(const std::string&)> audit;  // one JSON line per check
  // Scripted replay records outputs even for blocked calls so a fixed trace
  // stays comparable across monitors; disable for enforcement semantics.
  bool replay_outputs = true;

  TaggedValue inject_user(const Json& payload, const std::string& id_hint = "");
  TaggedValue inject_constant(const std::string& name, const Json& payload);
  // Models an unmonitored external read attributed to `source`; object
  // payloads become one value per field (`<kind>:<source>#<k>.<field>`).
  std::vector<TaggedValue> inject_external(const std::string& source, const Json& payload,
                                           const std::string& origin_kind = "tool");

  void issue_certificate(const DischargeCertificate& cert);

  // Checks, records, and tags one call. Unregistered tools fail closed.
  // Certificate consumption and discharge records commit only on ALLOW.
  Verdict run_call(const std::string& tool, std::vector<TaggedValue> args,
                   const Json& scripted_outputs);
};

}  // namespace pact
