#include "pact/provenance.hpp"

#include <array>
#include <sstream>

#include "pact/errors.hpp"

namespace pact {

namespace {
constexpr std::array<std::string_view, 4> kTrustNames = {
    "EXTERNAL", "TOOL_OUTPUT", "USER", "TRUSTED"};
constexpr std::array<std::string_view, 6> kRoleNames = {
    "TARGET", "COMMAND", "CREDENTIAL", "CONTENT", "SELECTOR", "CONTROL"};
}  // namespace

std::string_view trust_name(TrustLevel level) {
  return kTrustNames[static_cast<std::size_t>(level)];
}

std::optional<TrustLevel> trust_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kTrustNames.size(); ++i) {
    if (kTrustNames[i] == name) return static_cast<TrustLevel>(i);
  }
  return std::nullopt;
}

TrustLevel parse_trust(std::string_view name) {
  auto level = trust_from_name(name);
  if (!level) throw ParseError("unknown trust level: " + std::string(name));
  return *level;
}

std::string_view role_name(ArgRole role) {
  return kRoleNames[static_cast<std::size_t>(role)];
}

std::optional<ArgRole> role_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kRoleNames.size(); ++i) {
    if (kRoleNames[i] == name) return static_cast<ArgRole>(i);
  }
  return std::nullopt;
}

ArgRole parse_role(std::string_view name) {
  auto role = role_from_name(name);
  if (!role) throw ParseError("unknown role: " + std::string(name));
  return *role;
}

std::string obligation_to_string(const Obligation& ob) {
  if (ob.roles.empty()) return ob.predicate;
  std::ostringstream out;
  out << ob.predicate << '@';
  bool first = true;
  // std::set<ArgRole> iterates in enum order; stable text for equal scopes.
  for (ArgRole r : ob.roles) {
    if (!first) out << ',';
    out << role_name(r);
    first = false;
  }
  return out.str();
}

Obligation obligation_from_string(const std::string& text) {
  Obligation ob;
  auto at = text.find('@');
  if (at == std::string::npos) {
    ob.predicate = text;
  } else {
    ob.predicate = text.substr(0, at);
    std::string rest = text.substr(at + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      auto comma = rest.find(',', pos);
      std::string part = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (!part.empty()) ob.roles.insert(parse_role(part));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  if (ob.predicate.empty()) throw ParseError("empty obligation predicate: " + text);
  return ob;
}

ProvenanceTag merge(const ProvenanceTag& a, const ProvenanceTag& b) {
  ProvenanceTag out;
  out.origins = a.origins;
  out.origins.insert(b.origins.begin(), b.origins.end());
  out.trust = trust_min(a.trust, b.trust);
  out.obligations = a.obligations;
  out.obligations.insert(b.obligations.begin(), b.obligations.end());
  return out;
}

TrustLevel source_trust(SourceKind kind) {
  switch (kind) {
    case SourceKind::User: return TrustLevel::User;
    case SourceKind::TrustedConstant: return TrustLevel::Trusted;
    case SourceKind::External: return TrustLevel::External;
    case SourceKind::ToolOutput: return TrustLevel::ToolOutput;
  }
  return kTrustBottom;
}

ProvenanceTag make_source_tag(SourceKind kind, const std::string& origin) {
  if (origin.empty()) throw ParseError("source origin must be non-empty");
  ProvenanceTag tag;
  tag.origins.insert(origin);
  tag.trust = source_trust(kind);
  return tag;
}

Json tag_to_json(const ProvenanceTag& tag) {
  Json j;
  j["origins"] = Json::array();
  for (const auto& o : tag.origins) j["origins"].push_back(o);
  j["trust"] = std::string(trust_name(tag.trust));
  j["obligations"] = Json::array();
  for (const auto& ob : tag.obligations) j["obligations"].push_back(obligation_to_string(ob));
  return j;
}

ProvenanceTag tag_from_json(const Json& j) {
  ProvenanceTag tag;
  if (!j.is_object() || !j.contains("origins") || !j.contains("trust")) {
    throw ParseError("tag requires origins and trust");
  }
  for (const auto& o : j.at("origins")) tag.origins.insert(o.get<std::string>());
  if (tag.origins.empty()) throw ParseError("tag origins must be non-empty");
  tag.trust = parse_trust(j.at("trust").get<std::string>());
  if (j.contains("obligations")) {
    for (const auto& ob : j.at("obligations")) {
      tag.obligations.insert(obligation_from_string(ob.get<std::string>()));
    }
  }
  return tag;
}

ProvenanceTag TaggedValue::effective_tag(std::optional<ArgRole> role) const {
  if (!restriction) return tag;
  if (role && restriction->role_scope.count(*role) > 0) return tag;
  ProvenanceTag reverted;
  reverted.origins = tag.origins;
  reverted.trust = restriction->prior_trust;
  reverted.obligations = restriction->prior_obligations;
  return reverted;
}

Json value_to_json(const TaggedValue& v) {
  Json j;
  j["value_id"] = v.value_id;
  j["payload"] = v.payload;
  j["tag"] = tag_to_json(v.tag);
  j["producer_origin"] = v.producer_origin;
  j["producer_trust"] = std::string(trust_name(v.producer_trust));
  if (v.restriction) {
    Json r;
    r["role_scope"] = Json::array();
    for (ArgRole role : v.restriction->role_scope) r["role_scope"].push_back(std::string(role_name(role)));
    r["prior_trust"] = std::string(trust_name(v.restriction->prior_trust));
    r["prior_obligations"] = Json::array();
    for (const auto& ob : v.restriction->prior_obligations) {
      r["prior_obligations"].push_back(obligation_to_string(ob));
    }
    j["restriction"] = r;
  }
  return j;
}

TaggedValue value_from_json(const Json& j) {
  TaggedValue v;
  v.value_id = j.at("value_id").get<std::string>();
  v.payload = j.at("payload");
  v.tag = tag_from_json(j.at("tag"));
  v.producer_origin = j.at("producer_origin").get<std::string>();
  v.producer_trust = parse_trust(j.at("producer_trust").get<std::string>());
  if (j.contains("restriction")) {
    DischargeRestriction r;
    for (const auto& role : j.at("restriction").at("role_scope")) {
      r.role_scope.insert(parse_role(role.get<std::string>()));
    }
    r.prior_trust = parse_trust(j.at("restriction").at("prior_trust").get<std::string>());
    for (const auto& ob : j.at("restriction").at("prior_obligations")) {
      r.prior_obligations.insert(obligation_from_string(ob.get<std::string>()));
    }
    v.restriction = r;
  }
  return v;
}

}  // namespace pact
