#include "pact/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pact/errors.hpp"
#include "pact/resolver.hpp"

namespace pact {

PolicyConfig default_policies() {
  PolicyConfig p;
  p.enabled = true;
  p.sink_tools = {"execute_shell", "deploy_config"};
  return p;
}

FlatPolicy side_effect_flat_policy(const std::vector<ToolSchema>& schemas) {
  FlatPolicy policy;
  policy.high_threshold = TrustLevel::User;
  for (const auto& s : schemas) policy.high[s.tool_name] = s.side_effecting;
  return policy;
}

FlatPolicy high_integrity_flat_policy(const std::vector<ToolSchema>& schemas) {
  FlatPolicy policy;
  policy.high_threshold = TrustLevel::ToolOutput;
  for (const auto& s : schemas) policy.high[s.tool_name] = s.high_integrity;
  return policy;
}

std::vector<std::string> monitor_names() {
  return {"vanilla",      "flat-camel",   "flat-fides",       "pact-l0",
          "pact-l1",      "pact-l2",      "pact-l3",          "per-arg-user",
          "per-arg-external", "no-crossstep"};
}

MonitorConfig monitor_by_name(const std::string& name,
                              const std::vector<ToolSchema>& schemas) {
  MonitorConfig config;
  config.name = name;
  if (name == "vanilla") {
    config.kind.family = MonitorKind::Family::Vanilla;
    config.policies_on = false;
  } else if (name == "flat-camel") {
    config.kind.family = MonitorKind::Family::Flat;
    config.kind.flat = side_effect_flat_policy(schemas);
    config.policies_on = false;
  } else if (name == "flat-fides") {
    config.kind.family = MonitorKind::Family::Flat;
    config.kind.flat = high_integrity_flat_policy(schemas);
    config.policies_on = false;
  } else if (name == "pact-l0" || name == "pact-l1" || name == "pact-l2" || name == "pact-l3") {
    config.kind.family = MonitorKind::Family::Pact;
    config.pact_level = parse_level("L" + name.substr(6));
  } else if (name == "per-arg-user") {
    config.kind.family = MonitorKind::Family::PerArgUniform;
    config.kind.uniform_floor = TrustLevel::User;
    config.policies_on = false;
  } else if (name == "per-arg-external") {
    config.kind.family = MonitorKind::Family::PerArgUniform;
    config.kind.uniform_floor = TrustLevel::External;
    config.policies_on = false;
  } else if (name == "no-crossstep") {
    config.kind.family = MonitorKind::Family::NoCrossstep;
  } else {
    throw ParseError("unknown monitor: " + name);
  }
  return config;
}

namespace {

bool pact_like(const MonitorConfig& config) {
  return config.kind.family == MonitorKind::Family::Pact ||
         config.kind.family == MonitorKind::Family::NoCrossstep;
}

Session build_session(const Scenario& s, const MonitorConfig& config) {
  Session session;
  session.monitor = config.kind;
  if (config.policies_on && pact_like(config)) session.policies = default_policies();
  Level level = config.kind.family == MonitorKind::Family::Pact ? config.pact_level : Level::L2;
  auto member = static_cast<std::size_t>(level);
  for (const auto& schema : s.schemas) {
    Contract c = refinement_chain(schema)[member];
    if (config.contract_mutator) c = config.contract_mutator(c);
    session.contracts[c.tool] = std::move(c);
  }
  for (const auto& hand : s.handwritten) {
    Contract c = chain_from_contract(hand)[member];
    if (config.contract_mutator) c = config.contract_mutator(c);
    session.contracts[c.tool] = std::move(c);
  }
  for (const auto& [name, payload] : s.constants) session.inject_constant(name, payload);
  return session;
}

TaggedValue materialize(Session& session, const std::string& scenario_id, const ArgBinding& b,
                        std::optional<ArgRole> role, int& ephemeral) {
  switch (b.kind) {
    case ArgBinding::Kind::Ref:
      try {
        return session.state.value(b.ref);
      } catch (const ScenarioError&) {
        throw ScenarioError(scenario_id + ": binding references unknown value " + b.ref);
      }
    case ArgBinding::Kind::Raw: {
      ResolutionResult r = resolve(b.payload, session.state, role, nullptr);
      TaggedValue v;
      v.value_id = "raw:" + std::to_string(++ephemeral);
      v.payload = b.payload;
      v.tag = r.tag;
      v.producer_trust = r.tag.trust;  // no producer record; ablations keep the tag
      return v;
    }
    case ArgBinding::Kind::Merge: {
      if (b.parts.empty()) throw ScenarioError(scenario_id + ": empty merge binding");
      std::vector<TaggedValue> parts;
      for (const auto& p : b.parts) {
        parts.push_back(materialize(session, scenario_id, p, role, ephemeral));
      }
      TaggedValue v;
      v.value_id = "merge:" + std::to_string(++ephemeral);
      bool all_strings =
          std::all_of(parts.begin(), parts.end(),
                      [](const TaggedValue& p) { return p.payload.is_string(); });
      if (all_strings) {
        std::string joined;
        for (const auto& p : parts) {
          if (!joined.empty()) joined += " ";
          joined += p.payload.get<std::string>();
        }
        v.payload = joined;
      } else {
        Json arr = Json::array();
        for (const auto& p : parts) arr.push_back(p.payload);
        v.payload = arr;
      }
      v.tag = parts.front().effective_tag(std::nullopt);
      for (std::size_t i = 1; i < parts.size(); ++i) {
        v.tag = merge(v.tag, parts[i].effective_tag(std::nullopt));
      }
      v.producer_trust = v.tag.trust;
      return v;
    }
  }
  throw ScenarioError(scenario_id + ": unknown binding kind");
}

StepRecord replay_call(Session& session, const Scenario& s, const TraceStep& step,
                       int& ephemeral) {
  StepRecord rec;
  rec.tool = step.tool;
  rec.expect = step.expect;
  std::vector<TaggedValue> args;
  auto it = session.contracts.find(step.tool);
  if (it != session.contracts.end()) {
    const Contract& contract = it->second;
    if (step.args.size() != contract.args.size()) {
      throw ScenarioError(s.id + ": call to " + step.tool + " binds " +
                          std::to_string(step.args.size()) + " of " +
                          std::to_string(contract.args.size()) + " arguments");
    }
    for (const auto& spec : contract.args) {
      const ArgBinding* binding = nullptr;
      for (const auto& [name, b] : step.args) {
        if (name == spec.name) {
          binding = &b;
          break;
        }
      }
      if (binding == nullptr) {
        throw ScenarioError(s.id + ": call to " + step.tool + " misses argument " + spec.name);
      }
      args.push_back(materialize(session, s.id, *binding, spec.role, ephemeral));
    }
  }
  for (const auto& a : args) {
    rec.min_trust = trust_min(rec.min_trust, a.effective_tag(std::nullopt).trust);
  }
  Verdict verdict = session.run_call(step.tool, std::move(args), step.outputs);
  rec.decision = verdict.decision;
  rec.verdict_dump = verdict_to_json(verdict).dump();
  return rec;
}

ScenarioResult finish_result(const Scenario& s, std::vector<StepRecord> steps) {
  ScenarioResult out;
  out.id = s.id;
  out.attack = s.attack;
  out.steps = std::move(steps);
  out.success = true;
  out.secure = !s.attack;
  for (const auto& rec : out.steps) {
    if (rec.expect == Decision::Allow && rec.decision != Decision::Allow) out.success = false;
    if (rec.attack_step && rec.decision == Decision::Block) out.secure = true;
  }
  return out;
}

}  // namespace

ScenarioResult run_scenario(const Scenario& s, const MonitorConfig& config) {
  validate_scenario(s);
  Session session = build_session(s, config);
  std::vector<StepRecord> steps;
  int ephemeral = 0;
  for (const auto& step : s.trace) {
    switch (step.kind) {
      case TraceStep::Kind::InjectUser:
        session.inject_user(step.payload, step.user_id);
        break;
      case TraceStep::Kind::InjectExternal:
        session.inject_external(step.source, step.payload, step.origin_kind);
        break;
      case TraceStep::Kind::ToolCall: {
        StepRecord rec = replay_call(session, s, step, ephemeral);
        rec.attack_step = s.attack && step.expect == Decision::Block;
        steps.push_back(std::move(rec));
        break;
      }
    }
  }
  return finish_result(s, std::move(steps));
}

double SuiteReport::utility() const {
  return benign_total == 0 ? 1.0
                           : static_cast<double>(benign_pass) / static_cast<double>(benign_total);
}

double SuiteReport::security() const {
  return attack_total == 0
             ? 1.0
             : static_cast<double>(attacks_blocked) / static_cast<double>(attack_total);
}

double SuiteReport::accuracy() const {
  std::size_t total = benign_total + attack_total;
  return total == 0 ? 1.0
                    : static_cast<double>(benign_pass + attacks_blocked) /
                          static_cast<double>(total);
}

SuiteReport run_suite(const std::vector<Scenario>& scenarios, const MonitorConfig& config,
                      int jobs) {
  if (scenarios.empty()) throw SuiteError("empty scenario corpus");
  std::vector<ScenarioResult> results(scenarios.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      results[i] = run_scenario(scenarios[i], config);
    }
  } else {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w]() {
        try {
          for (std::size_t i = static_cast<std::size_t>(w); i < scenarios.size();
               i += static_cast<std::size_t>(jobs)) {
            results[i] = run_scenario(scenarios[i], config);
          }
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : workers) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::sort(results.begin(), results.end(),
            [](const ScenarioResult& a, const ScenarioResult& b) { return a.id < b.id; });

  SuiteReport report;
  report.monitor = config.name;
  for (const auto& r : results) {
    if (r.attack) {
      ++report.attack_total;
      if (r.secure) ++report.attacks_blocked;
    } else {
      ++report.benign_total;
      if (r.success) ++report.benign_pass;
    }
  }
  report.fp = report.benign_total - report.benign_pass;
  report.fn = report.attack_total - report.attacks_blocked;
  if (report.benign_total > 0) {
    report.utility_ci = wilson_interval(static_cast<int>(report.benign_pass),
                                        static_cast<int>(report.benign_total));
  }
  if (report.attack_total > 0) {
    report.security_ci = wilson_interval(static_cast<int>(report.attacks_blocked),
                                         static_cast<int>(report.attack_total));
  }
  report.results = std::move(results);
  return report;
}

Json report_to_json(const SuiteReport& report) {
  Json j;
  j["monitor"] = report.monitor;
  j["utility"] = report.utility();
  j["security"] = report.security();
  j["accuracy"] = report.accuracy();
  j["fp"] = report.fp;
  j["fn"] = report.fn;
  j["benign_total"] = report.benign_total;
  j["attack_total"] = report.attack_total;
  j["utility_ci"] = Json::array({report.utility_ci.first, report.utility_ci.second});
  j["security_ci"] = Json::array({report.security_ci.first, report.security_ci.second});
  j["scenarios"] = Json::array();
  for (const auto& r : report.results) {
    Json e;
    e["id"] = r.id;
    e["kind"] = r.attack ? "attack" : "benign";
    e["outcome"] = r.attack ? (r.secure ? "blocked" : "missed")
                            : (r.success ? "completed" : "refused");
    e["steps"] = Json::array();
    for (const auto& step : r.steps) {
      Json se;
      se["tool"] = step.tool;
      se["expect"] = std::string(decision_name(step.expect));
      se["decision"] = std::string(decision_name(step.decision));
      e["steps"].push_back(se);
    }
    j["scenarios"].push_back(e);
  }
  return j;
}

namespace {

std::string pct(double fraction) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1) << fraction * 100.0;
  return out.str();
}

std::string ci_text(const std::pair<double, double>& ci) {
  std::ostringstream out;
  out << "[" << pct(ci.first) << ", " << pct(ci.second) << "]";
  return out.str();
}

}  // namespace

std::string render_reports(const std::vector<SuiteReport>& reports) {
  std::ostringstream out;
  out << std::left << std::setw(18) << "Monitor" << std::right << std::setw(8) << "Utility"
      << std::setw(10) << "Security" << std::setw(4) << "FP" << std::setw(4) << "FN"
      << std::setw(7) << "Acc." << "  " << std::left << std::setw(16) << "Utility 95% CI"
      << std::setw(16) << "Security 95% CI" << "\n";
  out << std::string(83, '-') << "\n";
  for (const auto& r : reports) {
    out << std::left << std::setw(18) << r.monitor << std::right << std::setw(8)
        << pct(r.utility()) << std::setw(10) << pct(r.security()) << std::setw(4) << r.fp
        << std::setw(4) << r.fn << std::setw(7) << pct(r.accuracy()) << "  " << std::left
        << std::setw(16) << ci_text(r.utility_ci) << std::setw(16) << ci_text(r.security_ci)
        << "\n";
  }
  return out.str();
}

PrecisionSweep precision_sweep(const std::vector<Scenario>& scenarios, bool policies_on,
                               int jobs) {
  PrecisionSweep sweep;
  std::vector<std::set<std::pair<std::string, std::size_t>>> blocked(4);
  for (int level = 0; level <= 3; ++level) {
    MonitorConfig config;
    config.name = "pact-l" + std::to_string(level);
    config.kind.family = MonitorKind::Family::Pact;
    config.pact_level = static_cast<Level>(level);
    config.policies_on = policies_on;
    SuiteReport report = run_suite(scenarios, config, jobs);
    for (const auto& r : report.results) {
      for (std::size_t i = 0; i < r.steps.size(); ++i) {
        if (r.steps[i].decision == Decision::Block) {
          blocked[static_cast<std::size_t>(level)].insert({r.id, i});
        }
      }
    }
    sweep.reports.push_back(std::move(report));
  }
  for (int level = 0; level < 3; ++level) {
    const auto& coarse = blocked[static_cast<std::size_t>(level)];
    const auto& fine = blocked[static_cast<std::size_t>(level) + 1];
    if (!std::includes(coarse.begin(), coarse.end(), fine.begin(), fine.end())) {
      sweep.nested = false;
    }
  }
  sweep.strictly_finer = sweep.reports[0].utility() < sweep.reports[2].utility();
  return sweep;
}

FlatEnumeration enumerate_flat_configs(const std::vector<Scenario>& scenarios) {
  MonitorConfig vanilla;
  vanilla.name = "vanilla";
  vanilla.kind.family = MonitorKind::Family::Vanilla;
  vanilla.policies_on = false;
  SuiteReport oracle = run_suite(scenarios, vanilla, 1);

  std::vector<std::string> tools;
  for (const auto& r : oracle.results) {
    for (const auto& step : r.steps) {
      if (std::find(tools.begin(), tools.end(), step.tool) == tools.end()) {
        tools.push_back(step.tool);
      }
    }
  }
  std::sort(tools.begin(), tools.end());

  FlatEnumeration out;
  const TrustLevel thresholds[] = {TrustLevel::External, TrustLevel::ToolOutput,
                                   TrustLevel::User, TrustLevel::Trusted};
  for (TrustLevel threshold : thresholds) {
    for (std::uint64_t mask = 0; mask < (1ULL << tools.size()); ++mask) {
      ++out.configs;
      auto high = [&](const std::string& tool) {
        auto it = std::lower_bound(tools.begin(), tools.end(), tool);
        auto idx = static_cast<std::uint64_t>(it - tools.begin());
        return (mask >> idx) & 1ULL;
      };
      bool fp = false;
      bool fn = false;
      for (const auto& r : oracle.results) {
        for (const auto& step : r.steps) {
          bool blocks = high(step.tool) && !trust_leq(threshold, step.min_trust);
          if (!r.attack && step.expect == Decision::Allow && blocks) fp = true;
          if (r.attack && step.attack_step && !blocks) fn = true;
        }
      }
      if (!fp && !fn) ++out.perfect_configs;
    }
  }
  return out;
}

namespace {

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

// Same draws regardless of rate: nested perturbation sets across rates.
std::pair<double, int> noise_draw(std::uint64_t seed, const std::string& tool,
                                  const std::string& arg) {
  std::uint64_t key = fnv1a64(tool + "\x1f" + arg);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
  std::mt19937_64 rng(seq);
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  int pick = static_cast<int>(rng() % 5);
  return {u, pick};
}

void rederive_arg(ArgSpec& spec, ArgRole next, bool side_effecting) {
  spec.role = next;
  spec.trust_floor = role_default_floor(next, side_effecting);
  spec.authority = next == ArgRole::Control;
  if (next == ArgRole::Credential && spec.trust_floor != TrustLevel::Trusted) {
    spec.floor_justification = "role perturbation";
  }
}

}  // namespace

Contract inject_role_noise(const Contract& contract, double rate, std::uint64_t seed) {
  Contract out = contract;
  bool side_effecting = contract.capability_floor == TrustLevel::User;
  for (auto& spec : out.args) {
    if (!spec.role.has_value()) continue;
    auto [u, pick] = noise_draw(seed, contract.tool, spec.name);
    if (u >= rate) continue;
    std::vector<ArgRole> others;
    for (int r = 0; r < kRoleCount; ++r) {
      auto candidate = static_cast<ArgRole>(r);
      if (candidate != *spec.role) others.push_back(candidate);
    }
    rederive_arg(spec, others[static_cast<std::size_t>(pick)], side_effecting);
  }
  return out;
}

Contract semantic_inversion(const Contract& contract, InversionDirection direction) {
  Contract out = contract;
  bool side_effecting = contract.capability_floor == TrustLevel::User;
  ArgRole from = direction == InversionDirection::TargetToContent ? ArgRole::Target
                                                                  : ArgRole::Content;
  ArgRole to = direction == InversionDirection::TargetToContent ? ArgRole::Content
                                                                : ArgRole::Target;
  for (auto& spec : out.args) {
    if (spec.role == from) rederive_arg(spec, to, side_effecting);
  }
  return out;
}

std::vector<NoisePoint> noise_sensitivity(const std::vector<Scenario>& scenarios,
                                          const std::vector<double>& rates, int seeds,
                                          std::uint64_t base_seed, int jobs) {
  if (seeds <= 0) throw std::domain_error("noise sensitivity needs at least one seed");
  std::vector<NoisePoint> points;
  for (double rate : rates) {
    struct SeedResult {
      double sec_off, sec_on, util_off, util_on;
    };
    std::vector<SeedResult> per_seed(static_cast<std::size_t>(seeds));
    auto eval_seed = [&](int i) {
      std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
      SeedResult r{};
      for (bool policies : {false, true}) {
        MonitorConfig config;
        config.name = "pact-l2";
        config.kind.family = MonitorKind::Family::Pact;
        config.pact_level = Level::L2;
        config.policies_on = policies;
        config.contract_mutator = [rate, seed](const Contract& c) {
          return inject_role_noise(c, rate, seed);
        };
        SuiteReport report = run_suite(scenarios, config, 1);
        (policies ? r.sec_on : r.sec_off) = report.security();
        (policies ? r.util_on : r.util_off) = report.utility();
      }
      per_seed[static_cast<std::size_t>(i)] = r;
    };
    if (jobs <= 1) {
      for (int i = 0; i < seeds; ++i) eval_seed(i);
    } else {
      std::vector<std::thread> workers;
      std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
      for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w]() {
          try {
            for (int i = w; i < seeds; i += jobs) eval_seed(i);
          } catch (...) {
            errors[static_cast<std::size_t>(w)] = std::current_exception();
          }
        });
      }
      for (auto& t : workers) t.join();
      for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    NoisePoint p;
    p.rate = rate;
    for (const auto& r : per_seed) {
      p.security_off += r.sec_off;
      p.security_on += r.sec_on;
      p.utility_off += r.util_off;
      p.utility_on += r.util_on;
    }
    p.security_off /= seeds;
    p.security_on /= seeds;
    p.utility_off /= seeds;
    p.utility_on /= seeds;
    points.push_back(p);
  }
  return points;
}

std::pair<double, double> wilson_interval(int successes, int n, double z) {
  if (n == 0) throw std::domain_error("Wilson interval undefined for n = 0");
  if (successes < 0 || successes > n) {
    throw std::domain_error("successes outside [0, n]");
  }
  double nn = n;
  double p = static_cast<double>(successes) / nn;
  double z2 = z * z;
  double denom = 1.0 + z2 / nn;
  double center = (p + z2 / (2.0 * nn)) / denom;
  double half = (z / denom) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  double lower = std::max(0.0, center - half);
  double upper = std::min(1.0, center + half);
  return {lower, upper};
}

PrefixFuzzResult prefix_soundness_fuzz(const Scenario& s, int n_suffixes, std::uint64_t seed,
                                       const MonitorConfig& config, bool tamper) {
  validate_scenario(s);
  PrefixFuzzResult result;
  result.suffixes = static_cast<std::size_t>(std::max(0, n_suffixes));

  Session session = build_session(s, config);
  int ephemeral = 0;
  std::string last_snapshot;
  for (const auto& step : s.trace) {
    switch (step.kind) {
      case TraceStep::Kind::InjectUser:
        session.inject_user(step.payload, step.user_id);
        break;
      case TraceStep::Kind::InjectExternal:
        session.inject_external(step.source, step.payload, step.origin_kind);
        break;
      case TraceStep::Kind::ToolCall:
        last_snapshot = state_to_json(session.state).dump();
        replay_call(session, s, step, ephemeral);
        break;
    }
  }

  std::vector<std::string> prefix_dumps;
  for (const auto& entry : session.state.history) {
    prefix_dumps.push_back(verdict_to_json(entry.verdict).dump());
  }
  if (tamper && !prefix_dumps.empty()) {
    // Negative control: simulate a harness that rewrites recorded history.
    std::string& dump = prefix_dumps.back();
    Verdict rewritten = verdict_from_json(Json::parse(dump));
    rewritten.decision =
        rewritten.decision == Decision::Allow ? Decision::Block : Decision::Allow;
    dump = verdict_to_json(rewritten).dump();
  }

  // Re-run the final check from the serialized snapshot taken before it.
  if (!last_snapshot.empty() && !session.state.history.empty()) {
    const HistoryEntry& last = session.state.history.back();
    ProvenanceState reconstructed = state_from_json(Json::parse(last_snapshot));
    auto it = session.contracts.find(last.call.tool_name);
    const Contract* contract = it == session.contracts.end() ? nullptr : &it->second;
    Verdict again = evaluate_call(last.call, contract, reconstructed, session.monitor,
                                  session.certificates, session.procedures, session.policies);
    if (verdict_to_json(again).dump() != prefix_dumps.back()) {
      result.detail = "snapshot re-check diverged on " + s.id;
      return result;
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<std::string> tools;
  for (const auto& [tool, contract] : session.contracts) tools.push_back(tool);
  if (tools.empty()) {
    result.pass = true;
    return result;
  }
  for (int i = 0; i < n_suffixes; ++i) {
    Session clone = session;
    int calls = 1 + static_cast<int>(rng() % 4);
    for (int c = 0; c < calls; ++c) {
      const std::string& tool = tools[rng() % tools.size()];
      const Contract& contract = clone.contracts.at(tool);
      std::vector<std::string> ids;
      for (const auto& [id, v] : clone.state.values) ids.push_back(id);
      std::vector<TaggedValue> args;
      bool ok = !ids.empty() || contract.args.empty();
      if (!ok) break;
      for (std::size_t a = 0; a < contract.args.size(); ++a) {
        args.push_back(clone.state.value(ids[rng() % ids.size()]));
      }
      Json outputs;
      if (rng() % 2 == 0) outputs = Json{{"result", "suffix-" + std::to_string(c)}};
      clone.run_call(tool, std::move(args), outputs);
    }
    for (std::size_t k = 0; k < prefix_dumps.size(); ++k) {
      if (verdict_to_json(clone.state.history[k].verdict).dump() != prefix_dumps[k]) {
        result.detail = "suffix " + std::to_string(i) + " altered prefix verdict " +
                        std::to_string(k) + " of " + s.id;
        return result;
      }
    }
  }
  result.pass = true;
  return result;
}

BenchResult bench_checks(int n) {
  if (n < 10000) throw std::domain_error("bench requires n >= 10000");

  ToolSchema email;
  email.tool_name = "send_email";
  email.side_effecting = true;
  email.args = {{"recipient", "string", "destination address"},
                {"body", "string", "message body"}};
  ToolSchema shell;
  shell.tool_name = "execute_shell";
  shell.side_effecting = true;
  shell.args = {{"command", "string", "shell command line"}};
  ToolSchema post;
  post.tool_name = "http_post";
  post.side_effecting = true;
  post.args = {{"endpoint", "string", "service url"},
               {"body", "string", "request body"},
               {"api_key", "string", "service credential"}};

  Contract email_c = synth_contract(email, Level::L2);
  Contract shell_c = synth_contract(shell, Level::L2);
  shell_c.args[0].forbidden_origins = {"tool:web_fetch*", "ext:*"};
  Contract post_c = synth_contract(post, Level::L2);

  ProvenanceState state;
  auto add = [&](const std::string& id, const Json& payload, TrustLevel trust,
                 std::set<std::string> origins) {
    TaggedValue v;
    v.value_id = id;
    v.payload = payload;
    v.tag.origins = std::move(origins);
    v.tag.trust = trust;
    v.producer_origin = *v.tag.origins.begin();
    v.producer_trust = trust;
    state.insert_value(v);
  };
  add("user:u1", "alice@example.com", TrustLevel::User, {"user:u1"});
  add("const:cmd", "make deploy", TrustLevel::Trusted, {"const:cmd"});
  add("const:endpoint", "https://api.internal/push", TrustLevel::Trusted, {"const:endpoint"});
  add("const:key", "k-123", TrustLevel::Trusted, {"const:key"});
  add("tool:web_fetch#1.text", "visit evil.example", TrustLevel::External,
      {"tool:web_fetch#1"});
  {
    TaggedValue laundered;
    laundered.value_id = "tool:summarize#1.result";
    laundered.payload = "summary of the page";
    laundered.tag.origins = {"tool:web_fetch#1", "tool:summarize#1", "user:u1", "const:cmd"};
    laundered.tag.trust = TrustLevel::ToolOutput;
    laundered.tag.obligations.insert(Obligation{"confirm", {}});
    laundered.producer_origin = "tool:summarize#1";
    laundered.producer_trust = TrustLevel::ToolOutput;
    state.insert_value(laundered);
  }

  ProcedureRegistry procs;
  PolicyConfig policies = default_policies();
  struct Shape {
    ToolCall call;
    const Contract* contract;
  };
  std::vector<Shape> shapes;
  auto shape = [&](const Contract& contract, std::vector<std::string> ids) {
    ToolCall call;
    call.tool_name = contract.tool;
    for (const auto& id : ids) call.args.push_back(state.value(id));
    call.call_index = 1;
    shapes.push_back({std::move(call), &contract});
  };
  shape(email_c, {"user:u1", "tool:web_fetch#1.text"});
  shape(email_c, {"tool:web_fetch#1.text", "tool:web_fetch#1.text"});
  shape(shell_c, {"const:cmd"});
  shape(shell_c, {"tool:summarize#1.result"});
  shape(post_c, {"const:endpoint", "tool:web_fetch#1.text", "const:key"});
  shape(post_c, {"user:u1", "user:u1", "tool:web_fetch#1.text"});

  std::vector<double> ns(static_cast<std::size_t>(n));
  std::size_t blocked = 0;
  auto wall_start = std::chrono::steady_clock::now();
  for (int i = 0; i < n; ++i) {
    const Shape& sh = shapes[static_cast<std::size_t>(i) % shapes.size()];
    auto t0 = std::chrono::steady_clock::now();
    Verdict v = check_call(sh.call, *sh.contract, state, {}, procs, policies);
    auto t1 = std::chrono::steady_clock::now();
    if (v.decision == Decision::Block) ++blocked;
    ns[static_cast<std::size_t>(i)] =
        std::chrono::duration<double, std::nano>(t1 - t0).count();
  }
  auto wall_end = std::chrono::steady_clock::now();
  volatile std::size_t sink = blocked;
  (void)sink;

  std::sort(ns.begin(), ns.end());
  auto at = [&](double q) {
    auto idx = static_cast<std::size_t>(q * (static_cast<double>(ns.size()) - 1.0));
    return ns[idx];
  };
  BenchResult result;
  result.p50_us = at(0.50) / 1000.0;
  result.p99_us = at(0.99) / 1000.0;
  double seconds = std::chrono::duration<double>(wall_end - wall_start).count();
  result.throughput_per_s = seconds > 0 ? static_cast<double>(n) / seconds : 0.0;
  return result;
}

}  // namespace pact
