#include <doctest.h>

#include <random>

#include "pact/contract.hpp"
#include "pact/errors.hpp"

using namespace pact;

namespace {

Contract two_arg_contract(Level level) {
  Contract c;
  c.tool = "send_email";
  c.level = level;
  c.capability_floor = TrustLevel::User;
  ArgSpec recipient;
  recipient.name = "recipient";
  recipient.role = ArgRole::Target;
  recipient.trust_floor = TrustLevel::User;
  ArgSpec body;
  body.name = "body";
  body.role = ArgRole::Content;
  body.trust_floor = TrustLevel::External;
  c.args = {recipient, body};
  return c;
}

TaggedValue external_value(const std::string& id) {
  TaggedValue v;
  v.value_id = id;
  v.payload = "payload";
  v.tag.origins = {"ext:mail#1"};
  v.tag.trust = TrustLevel::External;
  v.producer_origin = "ext:mail#1";
  v.producer_trust = TrustLevel::External;
  return v;
}

}  // namespace

TEST_CASE("level names round-trip") {
  CHECK(level_name(Level::L0) == "L0");
  CHECK(parse_level("L3") == Level::L3);
  for (int i = 0; i < 4; ++i) {
    auto level = static_cast<Level>(i);
    CHECK(parse_level(level_name(level)) == level);
  }
  CHECK_THROWS_AS(parse_level("L4"), ParseError);
}

TEST_CASE("origin patterns match by prefix with a trailing star") {
  CHECK(origin_matches("tool:web_fetch#1", "tool:web_fetch*"));
  CHECK(origin_matches("tool:web_fetch#12.text", "tool:web_fetch*"));
  CHECK(!origin_matches("tool:web_search#1", "tool:web_fetch*"));
  CHECK(origin_matches("ext:mail#1", "ext:*"));
  CHECK(origin_matches("anything", "*"));
  CHECK(origin_matches("user:u1", "user:u1"));
  CHECK(!origin_matches("user:u12", "user:u1"));
  CHECK(!origin_matches("user:u1", ""));
}

TEST_CASE("authority follows the role except for the explicit flag roles") {
  ArgSpec spec;
  spec.role = ArgRole::Target;
  CHECK(spec.authority_bearing());
  spec.role = ArgRole::Command;
  CHECK(spec.authority_bearing());
  spec.role = ArgRole::Credential;
  CHECK(spec.authority_bearing());
  spec.role = ArgRole::Content;
  spec.authority = true;  // ignored; content never carries authority
  CHECK(!spec.authority_bearing());
  spec.role = ArgRole::Selector;
  spec.authority = false;
  CHECK(!spec.authority_bearing());
  spec.authority = true;
  CHECK(spec.authority_bearing());
  spec.role = ArgRole::Control;
  CHECK(spec.authority_bearing());
  spec.role.reset();
  CHECK(spec.unspecified());
  CHECK(!spec.authority_bearing());
}

TEST_CASE("effective floor depends on the contract level") {
  Contract c = two_arg_contract(Level::L0);
  CHECK(effective_floor(c, 0) == std::pair{TrustLevel::Trusted, FloorSource::L0Global});
  CHECK(effective_floor(c, 1) == std::pair{TrustLevel::Trusted, FloorSource::L0Global});

  c.level = Level::L1;
  CHECK(effective_floor(c, 0) == std::pair{TrustLevel::User, FloorSource::L1Capability});
  CHECK(effective_floor(c, 1) == std::pair{TrustLevel::User, FloorSource::L1Capability});

  c.level = Level::L2;
  CHECK(effective_floor(c, 0) == std::pair{TrustLevel::User, FloorSource::L2Role});
  CHECK(effective_floor(c, 1) == std::pair{TrustLevel::External, FloorSource::L2Role});

  c.level = Level::L3;
  CHECK(effective_floor(c, 0).first == TrustLevel::User);

  ArgSpec open;
  open.name = "extra";
  c.args.push_back(open);
  CHECK(effective_floor(c, 2) == std::pair{TrustLevel::Trusted, FloorSource::L2Role});

  CHECK_THROWS_AS(effective_floor(c, 3), SchemaMismatch);
}

TEST_CASE("procedure registry rejects conflicting re-registration") {
  ProcedureRegistry registry;
  registry.register_procedure({"confirm_dialog", TrustLevel::User});
  registry.register_procedure({"confirm_dialog", TrustLevel::User});  // idempotent
  CHECK_THROWS_AS(registry.register_procedure({"confirm_dialog", TrustLevel::Trusted}),
                  ParseError);
  REQUIRE(registry.find("confirm_dialog") != nullptr);
  CHECK(registry.find("confirm_dialog")->cert_trust == TrustLevel::User);
  CHECK(registry.find("confirm_dialog")->origin() == "proc:confirm_dialog");
  CHECK(registry.find("missing") == nullptr);
}

TEST_CASE("discharge upgrades inside the certificate bounds") {
  TaggedValue v = external_value("ext:mail#1.addr");
  v.tag.obligations.insert(Obligation{"confirm", {}});
  v.tag.obligations.insert(Obligation{"sanitize", {}});

  DischargeCertificate cert;
  cert.cert_id = "cert-1";
  cert.predicate = "confirm";
  cert.procedure = "confirm_dialog";
  cert.role_scope = {ArgRole::Target};
  cert.max_trust = TrustLevel::User;
  cert.bound_value_id = "ext:mail#1.addr";
  TrustedProcedure proc{"confirm_dialog", TrustLevel::User};

  TaggedValue d = apply_discharge(v, cert, proc);
  CHECK(d.value_id == "ext:mail#1.addr+cert-1");
  CHECK(d.tag.origins == std::set<std::string>{"ext:mail#1", "proc:confirm_dialog"});
  CHECK(d.tag.trust == TrustLevel::User);
  CHECK(d.tag.obligations.count(Obligation{"confirm", {}}) == 0);
  CHECK(d.tag.obligations.count(Obligation{"sanitize", {}}) == 1);
  REQUIRE(d.restriction.has_value());
  CHECK(d.restriction->role_scope == cert.role_scope);
  CHECK(d.restriction->prior_trust == TrustLevel::External);
  CHECK(d.restriction->prior_obligations == v.tag.obligations);
  CHECK(d.effective_tag(ArgRole::Target).trust == TrustLevel::User);
  CHECK(d.effective_tag(ArgRole::Content).trust == TrustLevel::External);

  SUBCASE("wrong binding, wrong procedure, or empty scope fail") {
    DischargeCertificate other = cert;
    other.bound_value_id = "ext:mail#1.body";
    CHECK_THROWS_AS(apply_discharge(v, other, proc), CertMismatch);

    TrustedProcedure stranger{"other_proc", TrustLevel::User};
    CHECK_THROWS_AS(apply_discharge(v, cert, stranger), CertMismatch);

    DischargeCertificate unscoped = cert;
    unscoped.role_scope.clear();
    CHECK_THROWS_AS(apply_discharge(v, unscoped, proc), CertMismatch);
  }

  SUBCASE("spent certificates are rejected") {
    std::set<std::string> consumed{"cert-1"};
    CHECK_THROWS_AS(apply_discharge(v, cert, proc, consumed), CertConsumed);
    CHECK_NOTHROW(apply_discharge(v, cert, proc, std::set<std::string>{"cert-9"}));
  }
}

TEST_CASE("discharge never expands authority over random inputs") {
  static const std::string predicates[] = {"confirm", "sanitize", "trust_floor",
                                           "forbidden_origin"};
  std::mt19937_64 rng(4202608);
  for (int i = 0; i < 10000; ++i) {
    TaggedValue v = external_value("v" + std::to_string(i));
    v.tag.trust = static_cast<TrustLevel>(rng() % 4);
    std::size_t n_obs = rng() % 3;
    for (std::size_t k = 0; k < n_obs; ++k) {
      v.tag.obligations.insert(Obligation{predicates[rng() % 4], {}});
    }

    TrustedProcedure proc{"p" + std::to_string(rng() % 3),
                          static_cast<TrustLevel>(rng() % 4)};
    DischargeCertificate cert;
    cert.cert_id = "c" + std::to_string(i);
    cert.predicate = predicates[rng() % 4];
    cert.procedure = proc.name;
    cert.role_scope.insert(static_cast<ArgRole>(rng() % kRoleCount));
    if (rng() % 2) cert.role_scope.insert(static_cast<ArgRole>(rng() % kRoleCount));
    cert.max_trust = static_cast<TrustLevel>(rng() % 4);
    cert.bound_value_id = v.value_id;

    TaggedValue d = apply_discharge(v, cert, proc);

    // Conferred trust is capped by both the certificate and the procedure.
    CHECK(trust_leq(d.tag.trust, cert.max_trust));
    CHECK(trust_leq(d.tag.trust, proc.cert_trust));
    CHECK(d.tag.trust == trust_min(cert.max_trust, proc.cert_trust));

    // Origins only grow, and record the procedure that vouched.
    for (const auto& o : v.tag.origins) CHECK(d.tag.origins.count(o) == 1);
    CHECK(d.tag.origins.count(proc.origin()) == 1);

    // Exactly the named obligation is discharged.
    for (const auto& ob : v.tag.obligations) {
      CHECK(d.tag.obligations.count(ob) == (ob.predicate == cert.predicate ? 0 : 1));
    }

    // Outside the scope the value is no better than before.
    REQUIRE(d.restriction.has_value());
    for (int r = 0; r < kRoleCount; ++r) {
      auto role = static_cast<ArgRole>(r);
      ProvenanceTag seen = d.effective_tag(role);
      if (cert.role_scope.count(role) == 0) {
        CHECK(seen.trust == v.tag.trust);
        CHECK(seen.obligations == v.tag.obligations);
      }
    }
    CHECK(d.effective_tag(std::nullopt).trust == v.tag.trust);

    // Single use: the same certificate cannot be applied again.
    std::set<std::string> consumed{cert.cert_id};
    CHECK_THROWS_AS(apply_discharge(v, cert, proc, consumed), CertConsumed);
  }
}

TEST_CASE("certificate coverage needs predicate, scope, and a listed procedure") {
  ArgSpec spec;
  spec.name = "recipient";
  spec.role = ArgRole::Target;
  spec.discharge_procedures = {"confirm_dialog"};

  DischargeCertificate cert;
  cert.cert_id = "cert-1";
  cert.predicate = "trust_floor";
  cert.procedure = "confirm_dialog";
  cert.role_scope = {ArgRole::Target};
  cert.bound_value_id = "v1";

  CHECK(cert_covers(cert, ViolationKind::TrustFloor, "", ArgRole::Target, spec));
  CHECK(!cert_covers(cert, ViolationKind::ForbiddenOrigin, "", ArgRole::Target, spec));
  CHECK(!cert_covers(cert, ViolationKind::TrustFloor, "", ArgRole::Command, spec));
  CHECK(!cert_covers(cert, ViolationKind::Unspecified, "", ArgRole::Target, spec));

  cert.predicate = "confirm";
  CHECK(cert_covers(cert, ViolationKind::Obligation, "confirm", ArgRole::Target, spec));
  CHECK(!cert_covers(cert, ViolationKind::Obligation, "sanitize", ArgRole::Target, spec));

  spec.discharge_procedures.clear();
  CHECK(!cert_covers(cert, ViolationKind::Obligation, "confirm", ArgRole::Target, spec));
}

TEST_CASE("safe refinement permits tightening and rejects weakening") {
  ProcedureRegistry registry;
  registry.register_procedure({"confirm_dialog", TrustLevel::User});

  Contract coarse = two_arg_contract(Level::L1);
  coarse.args[0].forbidden_origins = {"ext:*"};
  Contract fine = two_arg_contract(Level::L2);
  fine.args[0].forbidden_origins = {"ext:*", "tool:web_fetch*"};

  CHECK(is_safe_refinement(coarse, fine, registry));
  CHECK(is_safe_refinement(coarse, coarse, registry));

  SUBCASE("level may not regress") {
    CHECK(!is_safe_refinement(fine, coarse, registry));
  }

  SUBCASE("authority floors may rise but not drop") {
    Contract raised = fine;
    raised.args[0].trust_floor = TrustLevel::Trusted;
    CHECK(is_safe_refinement(coarse, raised, registry));
    Contract dropped = fine;
    dropped.args[0].trust_floor = TrustLevel::External;
    CHECK(!is_safe_refinement(coarse, dropped, registry));
  }

  SUBCASE("non-authority floors are unconstrained") {
    Contract dropped = fine;
    dropped.args[1].trust_floor = TrustLevel::External;
    Contract coarse_content = coarse;
    coarse_content.args[1].trust_floor = TrustLevel::User;
    CHECK(is_safe_refinement(coarse_content, dropped, registry));
  }

  SUBCASE("forbidden origins on authority args must be kept") {
    Contract forgot = fine;
    forgot.args[0].forbidden_origins = {"tool:web_fetch*"};
    CHECK(!is_safe_refinement(coarse, forgot, registry));
  }

  SUBCASE("new discharge procedures must be registered") {
    Contract certified = fine;
    certified.level = Level::L3;
    certified.args[0].discharge_procedures = {"confirm_dialog"};
    CHECK(is_safe_refinement(coarse, certified, registry));
    certified.args[0].discharge_procedures = {"unvetted_proc"};
    CHECK(!is_safe_refinement(coarse, certified, registry));
  }

  SUBCASE("mismatched shapes are a schema error, not a refinement verdict") {
    Contract other_tool = fine;
    other_tool.tool = "send_message";
    CHECK_THROWS_AS(is_safe_refinement(coarse, other_tool, registry), SchemaMismatch);

    Contract fewer = fine;
    fewer.args.pop_back();
    CHECK_THROWS_AS(is_safe_refinement(coarse, fewer, registry), SchemaMismatch);

    Contract renamed = fine;
    renamed.args[1].name = "text";
    CHECK_THROWS_AS(is_safe_refinement(coarse, renamed, registry), SchemaMismatch);
  }
}

TEST_CASE("contract JSON round-trips byte-identically") {
  Contract c = two_arg_contract(Level::L3);
  c.args[0].forbidden_origins = {"ext:*"};
  c.args[0].required_obligations = {"confirm"};
  c.args[0].discharge_procedures = {"confirm_dialog"};
  ArgSpec selector;
  selector.name = "thread_id";
  selector.role = ArgRole::Selector;
  selector.trust_floor = TrustLevel::ToolOutput;
  selector.authority = false;
  c.args.push_back(selector);
  ArgSpec open;
  open.name = "unused";
  c.args.push_back(open);
  c.outputs.default_field.trust = TrustLevel::ToolOutput;
  c.outputs.default_field.policy = OriginPolicy::Passthrough;
  OutputFieldSpec attested;
  attested.trust = TrustLevel::Trusted;
  attested.policy = OriginPolicy::Attested;
  attested.flows_from = {"recipient"};
  c.outputs.fields["receipt"] = attested;

  Json j = contract_to_json(c);
  Contract back = contract_from_json(j);
  CHECK(contract_to_json(back).dump() == j.dump());
  CHECK(back.args.size() == 4);
  CHECK(back.args[3].unspecified());
  CHECK(back.outputs.for_field("receipt").policy == OriginPolicy::Attested);
  CHECK(back.outputs.for_field("other").policy == OriginPolicy::Passthrough);
}

TEST_CASE("contract JSON parsing fails closed on unsound specs") {
  Json j = contract_to_json(two_arg_contract(Level::L2));

  SUBCASE("credential floors below TRUSTED need a written justification") {
    j["args"][0]["role"] = "CREDENTIAL";
    j["args"][0]["trust_floor"] = "USER";
    CHECK_THROWS_AS(contract_from_json(j), ParseError);
    j["args"][0]["floor_justification"] = "issued per-session by the broker";
    CHECK_NOTHROW(contract_from_json(j));
    j["args"][0]["trust_floor"] = "TRUSTED";
    j["args"][0].erase("floor_justification");
    CHECK_NOTHROW(contract_from_json(j));
  }

  SUBCASE("selector and control args need an explicit authority flag") {
    j["args"][0]["role"] = "SELECTOR";
    CHECK_THROWS_AS(contract_from_json(j), ParseError);
    j["args"][0]["authority"] = false;
    CHECK_NOTHROW(contract_from_json(j));
    j["args"][0]["role"] = "CONTROL";
    j["args"][0].erase("authority");
    CHECK_THROWS_AS(contract_from_json(j), ParseError);
  }

  SUBCASE("unknown fields and names are rejected") {
    Json bad = j;
    bad["tool"] = "";
    CHECK_THROWS_AS(contract_from_json(bad), ParseError);
    bad = j;
    bad["level"] = "L9";
    CHECK_THROWS_AS(contract_from_json(bad), ParseError);
    bad = j;
    bad["output_spec"]["default"]["origin_policy"] = "verbatim";
    CHECK_THROWS_AS(contract_from_json(bad), ParseError);
  }
}

TEST_CASE("certificate JSON round-trips and requires a scope") {
  DischargeCertificate cert;
  cert.cert_id = "cert-1";
  cert.predicate = "confirm";
  cert.procedure = "confirm_dialog";
  cert.role_scope = {ArgRole::Target};
  cert.max_trust = TrustLevel::User;
  cert.bound_value_id = "ext:mail#1.addr";

  Json j = certificate_to_json(cert);
  DischargeCertificate back = certificate_from_json(j);
  CHECK(certificate_to_json(back).dump() == j.dump());
  CHECK(back.role_scope == cert.role_scope);

  j["role_scope"] = Json::array();
  CHECK_THROWS_AS(certificate_from_json(j), ParseError);
}
