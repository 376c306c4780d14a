#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pact/jsonx.hpp"
#include "pact/roles.hpp"
#include "pact/trust.hpp"

namespace pact {

// Obligations compare and deduplicate by predicate name. The optional role
// scope restricts where the obligation applies; an empty scope means every role.
struct Obligation {
  std::string predicate;
  std::set<ArgRole> roles;

  bool applies_to(ArgRole role) const {
    return roles.empty() || roles.count(role) > 0;
  }

  friend bool operator<(const Obligation& a, const Obligation& b) {
    return a.predicate < b.predicate;
  }
  friend bool operator==(const Obligation& a, const Obligation& b) {
    return a.predicate == b.predicate;
  }
};

// Compact string form used in canonical JSON: "confirm" or "confirm@TARGET,COMMAND"
// (scope roles in declaration order).
std::string obligation_to_string(const Obligation& ob);
Obligation obligation_from_string(const std::string& text);

// Provenance tag attached to every runtime value. Origins are opaque ids
// (convention kind:name#index) and must be non-empty on any constructed tag.
struct ProvenanceTag {
  std::set<std::string> origins;
  TrustLevel trust = kTrustBottom;
  std::set<Obligation> obligations;

  friend bool operator==(const ProvenanceTag& a, const ProvenanceTag& b) {
    return a.origins == b.origins && a.trust == b.trust && a.obligations == b.obligations;
  }
};

// Pointwise meet: origin union, trust minimum, obligation union.
// Commutative, associative, idempotent; never raises trust, never drops
// an origin or an obligation.
ProvenanceTag merge(const ProvenanceTag& a, const ProvenanceTag& b);

inline bool meets_floor(const ProvenanceTag& tag, TrustLevel floor) {
  return trust_leq(floor, tag.trust);
}

enum class SourceKind { User, TrustedConstant, External, ToolOutput };

TrustLevel source_trust(SourceKind kind);
// Fresh source tag: single origin, kind-determined trust, no obligations.
ProvenanceTag make_source_tag(SourceKind kind, const std::string& origin);

// Canonical JSON: {"origins":[...sorted...],"trust":"USER","obligations":[...sorted...]}.
Json tag_to_json(const ProvenanceTag& tag);
ProvenanceTag tag_from_json(const Json& j);

// A discharge-derived value carries the certificate's role scope as a usage
// restriction; outside that scope the pre-discharge trust and obligations apply.
struct DischargeRestriction {
  std::set<ArgRole> role_scope;
  TrustLevel prior_trust = kTrustBottom;
  std::set<Obligation> prior_obligations;
};

struct TaggedValue {
  std::string value_id;
  Json payload;
  ProvenanceTag tag;
  // Event that produced this value: used by the no-crossstep ablation, which
  // rebuilds tags from the immediate producer alone.
  std::string producer_origin;
  TrustLevel producer_trust = kTrustBottom;
  std::optional<DischargeRestriction> restriction;

  // Tag as seen when binding this value to an argument of the given role.
  // A certificate upgrade is only valid inside its role scope; any other use
  // (including role-less checks) sees the pre-discharge trust and obligations.
  ProvenanceTag effective_tag(std::optional<ArgRole> role) const;
};

Json value_to_json(const TaggedValue& v);
TaggedValue value_from_json(const Json& j);

}  // namespace pact
