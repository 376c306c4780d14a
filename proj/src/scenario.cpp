#include "pact/scenario.hpp"

#include "pact/errors.hpp"

namespace pact {

void validate_scenario(const Scenario& s) {
  if (s.id.empty()) throw ScenarioError("scenario without id");
  if (s.trace.empty()) throw ScenarioError(s.id + ": empty trace");
  int expected_blocks = 0;
  int tool_calls = 0;
  for (const auto& step : s.trace) {
    if (step.kind != TraceStep::Kind::ToolCall) continue;
    ++tool_calls;
    if (step.tool.empty()) throw ScenarioError(s.id + ": tool_call without tool");
    if (step.expect == Decision::Block) ++expected_blocks;
  }
  if (tool_calls == 0) throw ScenarioError(s.id + ": no tool calls");
  if (s.attack && expected_blocks != 1) {
    throw ScenarioError(s.id + ": attack scenario needs exactly one expected block");
  }
  if (!s.attack && expected_blocks != 0) {
    throw ScenarioError(s.id + ": benign scenario expects a block");
  }
}

namespace {

Json binding_to_json(const ArgBinding& b) {
  Json j;
  switch (b.kind) {
    case ArgBinding::Kind::Ref:
      j["ref"] = b.ref;
      break;
    case ArgBinding::Kind::Raw:
      j["raw"] = b.payload;
      break;
    case ArgBinding::Kind::Merge: {
      Json parts = Json::array();
      for (const auto& p : b.parts) parts.push_back(binding_to_json(p));
      j["merge"] = parts;
      break;
    }
  }
  return j;
}

ArgBinding binding_from_json(const Json& j) {
  ArgBinding b;
  if (j.contains("ref")) {
    b.kind = ArgBinding::Kind::Ref;
    b.ref = j.at("ref").get<std::string>();
  } else if (j.contains("raw")) {
    b.kind = ArgBinding::Kind::Raw;
    b.payload = j.at("raw");
  } else if (j.contains("merge")) {
    b.kind = ArgBinding::Kind::Merge;
    for (const auto& p : j.at("merge")) b.parts.push_back(binding_from_json(p));
  } else {
    throw ParseError("argument binding needs ref, raw, or merge");
  }
  return b;
}

}  // namespace

Json scenario_to_json(const Scenario& s) {
  Json j;
  j["id"] = s.id;
  j["domain"] = s.domain;
  j["kind"] = s.attack ? "attack" : "benign";
  j["tools"] = Json::array();
  for (const auto& schema : s.schemas) j["tools"].push_back(schema_to_json(schema));
  if (!s.handwritten.empty()) {
    j["contracts"] = Json::array();
    for (const auto& c : s.handwritten) j["contracts"].push_back(contract_to_json(c));
  }
  if (!s.constants.empty()) {
    Json consts = Json::object();
    for (const auto& [name, payload] : s.constants) consts[name] = payload;
    j["constants"] = consts;
  }
  if (s.resolver_mode_default) j["mode"] = "resolver";
  j["trace"] = Json::array();
  for (const auto& step : s.trace) {
    Json e;
    switch (step.kind) {
      case TraceStep::Kind::InjectUser:
        e["kind"] = "inject_user";
        e["payload"] = step.payload;
        if (!step.user_id.empty()) e["id"] = step.user_id;
        break;
      case TraceStep::Kind::InjectExternal:
        e["kind"] = "inject_external";
        e["source"] = step.source;
        e["payload"] = step.payload;
        if (step.origin_kind != "tool") e["origin_kind"] = step.origin_kind;
        break;
      case TraceStep::Kind::ToolCall: {
        e["kind"] = "tool_call";
        e["tool"] = step.tool;
        Json args = Json::object();
        for (const auto& [name, binding] : step.args) args[name] = binding_to_json(binding);
        e["args"] = args;
        e["expect"] = std::string(decision_name(step.expect));
        if (!step.outputs.is_null()) e["outputs"] = step.outputs;
        if (step.resolver_mode.has_value()) {
          e["mode"] = *step.resolver_mode ? "resolver" : "oracle";
        }
        break;
      }
    }
    j["trace"].push_back(e);
  }
  return j;
}

Scenario scenario_from_json(const Json& j) {
  Scenario s;
  s.id = j.at("id").get<std::string>();
  s.domain = j.value("domain", std::string());
  std::string kind = j.value("kind", std::string("benign"));
  if (kind != "benign" && kind != "attack") throw ParseError(s.id + ": unknown kind " + kind);
  s.attack = kind == "attack";
  if (j.contains("tools")) {
    for (const auto& t : j.at("tools")) s.schemas.push_back(schema_from_json(t));
  }
  if (j.contains("contracts")) {
    for (const auto& c : j.at("contracts")) s.handwritten.push_back(contract_from_json(c));
  }
  if (j.contains("constants")) {
    for (auto it = j.at("constants").begin(); it != j.at("constants").end(); ++it) {
      s.constants[it.key()] = it.value();
    }
  }
  s.resolver_mode_default = j.value("mode", std::string("oracle")) == "resolver";
  for (const auto& e : j.at("trace")) {
    TraceStep step;
    std::string step_kind = e.at("kind").get<std::string>();
    if (step_kind == "inject_user") {
      step.kind = TraceStep::Kind::InjectUser;
      step.payload = e.at("payload");
      step.user_id = e.value("id", std::string());
    } else if (step_kind == "inject_external") {
      step.kind = TraceStep::Kind::InjectExternal;
      step.source = e.at("source").get<std::string>();
      step.payload = e.at("payload");
      step.origin_kind = e.value("origin_kind", std::string("tool"));
    } else if (step_kind == "tool_call") {
      step.kind = TraceStep::Kind::ToolCall;
      step.tool = e.at("tool").get<std::string>();
      for (auto it = e.at("args").begin(); it != e.at("args").end(); ++it) {
        step.args.emplace_back(it.key(), binding_from_json(it.value()));
      }
      step.expect = parse_decision(e.value("expect", std::string("ALLOW")));
      if (e.contains("outputs")) step.outputs = e.at("outputs");
      if (e.contains("mode")) step.resolver_mode = e.at("mode").get<std::string>() == "resolver";
    } else {
      throw ParseError(s.id + ": unknown trace step kind " + step_kind);
    }
    s.trace.push_back(std::move(step));
  }
  validate_scenario(s);
  return s;
}

}  // namespace pact
