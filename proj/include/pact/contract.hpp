#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pact/provenance.hpp"

namespace pact {

// Contract precision levels. L0 treats the call as one opaque authority
// boundary, L1 applies one capability floor, L2 adds per-role argument checks,
// L3 additionally admits certified discharge.
enum class Level : std::uint8_t { L0 = 0, L1 = 1, L2 = 2, L3 = 3 };

std::string_view level_name(Level level);
Level parse_level(std::string_view name);

// Per-argument specification. role == nullopt encodes an explicit
// `unspecified` entry, which fails closed at L2/L3.
struct ArgSpec {
  std::string name;
  std::optional<ArgRole> role;
  TrustLevel trust_floor = kTrustTop;
  // TARGET/COMMAND/CREDENTIAL imply authority; CONTENT never carries it;
  // SELECTOR/CONTROL take the explicit per-contract flag.
  bool authority = false;
  std::vector<std::string> forbidden_origins;   // prefix patterns, trailing '*'
  std::vector<std::string> required_obligations;
  std::vector<std::string> discharge_procedures;
  // Required to relax the TRUSTED floor a CREDENTIAL role implies.
  std::string floor_justification;

  bool unspecified() const { return !role.has_value(); }
  bool authority_bearing() const {
    if (!role) return false;
    if (role_always_authority(*role)) return true;
    if (*role == ArgRole::Content) return false;
    return authority;
  }
};

// True when the origin matches the prefix pattern ("tool:web_fetch*" matches
// "tool:web_fetch#1"; a pattern without '*' must match exactly).
bool origin_matches(const std::string& origin, const std::string& pattern);

enum class OriginPolicy : std::uint8_t { ToolOrigin, Passthrough, Attested };

// How one output field is tagged. All policies accumulate the flowing inputs'
// origins and obligations plus the producing tool origin; tool_origin and
// attested assign the declared trust, passthrough takes the merge minimum
// over the flowing inputs.
struct OutputFieldSpec {
  TrustLevel trust = TrustLevel::ToolOutput;
  OriginPolicy policy = OriginPolicy::ToolOrigin;
  std::vector<std::string> flows_from;  // empty = every argument flows in
};

struct OutputSpec {
  OutputFieldSpec default_field;
  std::map<std::string, OutputFieldSpec> fields;

  const OutputFieldSpec& for_field(const std::string& name) const {
    auto it = fields.find(name);
    return it == fields.end() ? default_field : it->second;
  }
};

struct Contract {
  std::string tool;
  Level level = Level::L2;
  std::vector<ArgSpec> args;
  OutputSpec outputs;
  TrustLevel capability_floor = TrustLevel::User;

  const ArgSpec* find_arg(const std::string& name) const;
  int arg_index(const std::string& name) const;  // -1 when absent
};

// Where an argument's effective floor came from at the contract's level.
enum class FloorSource : std::uint8_t { L0Global, L1Capability, L2Role };

// L0: TRUSTED for every argument. L1: the capability floor. L2/L3: the
// ArgSpec floor (unspecified entries are handled fail-closed by the monitor;
// here they conservatively report the top floor).
std::pair<TrustLevel, FloorSource> effective_floor(const Contract& contract, std::size_t arg_index);

// Trusted procedure registered out of band; cert_trust is fixed at
// registration and bounds what any certificate issued through it can confer.
struct TrustedProcedure {
  std::string name;
  TrustLevel cert_trust = TrustLevel::User;

  std::string origin() const { return "proc:" + name; }
};

struct ProcedureRegistry {
  std::map<std::string, TrustedProcedure> procedures;

  void register_procedure(const TrustedProcedure& proc);
  const TrustedProcedure* find(const std::string& name) const;
};

// Single-use certificate letting procedure `procedure` discharge predicate
// `predicate` for the bound value within `role_scope`, conferring at most
// `max_trust`.
struct DischargeCertificate {
  std::string cert_id;
  std::string predicate;        // "trust_floor", "forbidden_origin", or an obligation name
  std::string procedure;
  std::set<ArgRole> role_scope;  // non-empty
  TrustLevel max_trust = TrustLevel::User;
  std::string bound_value_id;
};

// Non-expansive discharge: origins gain the procedure origin, trust becomes
// min(cert.max_trust, proc.cert_trust), the named obligation (if any) is
// removed, and the result carries the certificate scope as a usage
// restriction. Throws CertMismatch when the certificate binds another value.
TaggedValue apply_discharge(const TaggedValue& v, const DischargeCertificate& cert,
                            const TrustedProcedure& proc);

// Same, but rejects certificates already spent: throws CertConsumed when
// cert.cert_id is in `consumed`.
TaggedValue apply_discharge(const TaggedValue& v, const DischargeCertificate& cert,
                            const TrustedProcedure& proc, const std::set<std::string>& consumed);

// Violation kinds shared between the monitor and certificate coverage.
enum class ViolationKind : std::uint8_t { TrustFloor, ForbiddenOrigin, Obligation, Unspecified };

std::string_view violation_kind_name(ViolationKind kind);

// True when the certificate names the failed predicate, the argument role is
// inside the certificate scope, and the certificate's procedure is listed in
// the argument's discharge procedures.
bool cert_covers(const DischargeCertificate& cert, ViolationKind failed,
                 const std::string& failed_predicate, ArgRole role, const ArgSpec& spec);

// Definition of safe refinement between two contracts for the same tool and
// argument list: the finer contract has level >= the coarser, never lowers an
// authority-bearing floor, keeps forbidden-origin supersets there, and only
// adds discharge procedures that exist in the registry.
// Throws SchemaMismatch when tool or argument names differ.
bool is_safe_refinement(const Contract& coarse, const Contract& fine,
                        const ProcedureRegistry& registry);

Json contract_to_json(const Contract& contract);
Contract contract_from_json(const Json& j);

Json certificate_to_json(const DischargeCertificate& cert);
DischargeCertificate certificate_from_json(const Json& j);

}  // namespace pact
