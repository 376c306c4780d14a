#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pact/monitor.hpp"
#include "pact/scenario.hpp"
#include "pact/synthesis.hpp"

namespace pact {

// Which enforcement abstraction a run uses, plus the knobs shared by all of
// them. `contract_mutator` lets experiments perturb each contract after the
// chain member is selected (role noise, semantic inversion); empty means
// identity.
struct MonitorConfig {
  std::string name = "pact-l2";
  MonitorKind kind;
  Level pact_level = Level::L2;
  bool policies_on = true;
  std::function<Contract(const Contract&)> contract_mutator;
};

// Sink tools and credential cues used when policies are on.
PolicyConfig default_policies();

// Flat tool-level policy builders: one labels every side-effecting tool HIGH
// with a USER threshold, the other labels only the configured high-integrity
// tools HIGH with a TOOL_OUTPUT threshold.
FlatPolicy side_effect_flat_policy(const std::vector<ToolSchema>& schemas);
FlatPolicy high_integrity_flat_policy(const std::vector<ToolSchema>& schemas);

// Named configurations: vanilla, flat-camel, flat-fides, pact-l0..pact-l3,
// per-arg-user, per-arg-external, no-crossstep. Throws ParseError on an
// unknown name.
MonitorConfig monitor_by_name(const std::string& name, const std::vector<ToolSchema>& schemas);
std::vector<std::string> monitor_names();

struct StepRecord {
  std::string tool;
  Decision expect = Decision::Allow;
  Decision decision = Decision::Allow;
  TrustLevel min_trust = kTrustTop;  // lowest argument trust, for flat replays
  bool attack_step = false;
  std::string verdict_dump;  // canonical verdict JSON
};

struct ScenarioResult {
  std::string id;
  bool attack = false;
  bool success = false;  // benign: every expected-allow call allowed
  bool secure = false;   // attack: the designated step blocked
  std::vector<StepRecord> steps;  // tool calls only, trace order
};

// Replays one scenario through the configured monitor. Contracts come from
// the schemas' refinement chains (or hand-written chains) at the configured
// level; values are tagged per binding mode. Throws ScenarioError on
// malformed traces.
ScenarioResult run_scenario(const Scenario& s, const MonitorConfig& config);

struct SuiteReport {
  std::string monitor;
  std::size_t benign_total = 0;
  std::size_t attack_total = 0;
  std::size_t benign_pass = 0;
  std::size_t attacks_blocked = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::pair<double, double> utility_ci{0.0, 1.0};
  std::pair<double, double> security_ci{0.0, 1.0};
  std::vector<ScenarioResult> results;  // sorted by scenario id

  double utility() const;
  double security() const;
  double accuracy() const;
};

// Runs every scenario (optionally across worker threads) and aggregates the
// classification metrics. Throws SuiteError on an empty corpus.
SuiteReport run_suite(const std::vector<Scenario>& scenarios, const MonitorConfig& config,
                      int jobs = 1);

Json report_to_json(const SuiteReport& report);
std::string render_reports(const std::vector<SuiteReport>& reports);

// Level sweep over the shared refinement chains.
struct PrecisionSweep {
  std::vector<SuiteReport> reports;  // L0..L3
  bool nested = true;          // blocked-call sets shrink as the level rises
  bool strictly_finer = true;  // utility(L0) < utility(L2)
};
PrecisionSweep precision_sweep(const std::vector<Scenario>& scenarios, bool policies_on = true,
                               int jobs = 1);

// Exhaustive check over every HIGH/LOW labeling of the suite's tools (and
// each trust threshold): does some flat configuration avoid both false
// positives and false negatives?
struct FlatEnumeration {
  std::size_t configs = 0;
  std::size_t perfect_configs = 0;  // zero means the dichotomy holds
};
FlatEnumeration enumerate_flat_configs(const std::vector<Scenario>& scenarios);

// Role-noise perturbation: each specified argument role is redrawn uniformly
// from the other five roles with probability `rate`; the floor is re-derived
// from the new role. Draws are keyed by (seed, tool, argument) so the set of
// perturbed arguments is nested as the rate grows.
Contract inject_role_noise(const Contract& contract, double rate, std::uint64_t seed);

enum class InversionDirection { TargetToContent, ContentToTarget };
Contract semantic_inversion(const Contract& contract, InversionDirection direction);

struct NoisePoint {
  double rate = 0.0;
  double security_off = 0.0;  // policies disabled
  double security_on = 0.0;   // policies enabled
  double utility_off = 0.0;
  double utility_on = 0.0;
};

// Seed-averaged metrics at each noise rate, with and without the global
// policies, using common random draws across rates.
std::vector<NoisePoint> noise_sensitivity(const std::vector<Scenario>& scenarios,
                                          const std::vector<double>& rates, int seeds,
                                          std::uint64_t base_seed, int jobs = 1);

// Wilson score interval, clamped to [0,1]. Throws std::domain_error when
// n = 0.
std::pair<double, double> wilson_interval(int successes, int n, double z = 1.959964);

// Replays the scenario, then appends random synthetic suffixes and checks
// that no continuation alters any recorded prefix verdict; also re-runs the
// final check from a serialized state snapshot and compares bit-for-bit.
// `tamper` rewrites one recorded verdict first and must make the check fail.
struct PrefixFuzzResult {
  bool pass = false;
  std::size_t suffixes = 0;
  std::string detail;
};
PrefixFuzzResult prefix_soundness_fuzz(const Scenario& s, int n_suffixes, std::uint64_t seed,
                                       const MonitorConfig& config, bool tamper = false);

struct BenchResult {
  double p50_us = 0.0;
  double p99_us = 0.0;
  double throughput_per_s = 0.0;
};
// Latency distribution of check_call over a representative contract and
// session mix. Requires n >= 10000.
BenchResult bench_checks(int n);

}  // namespace pact
